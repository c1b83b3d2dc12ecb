#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "psid/common.hpp"

namespace psid::ad {

// Reverse-accumulation tape. Each recorded node stores up to two parents with
// local partial derivatives; a backward sweep over the node list yields the
// gradient of one output with respect to every input at a small constant
// multiple of the forward cost.
class Tape {
 public:
  struct Node {
    double w0, w1;
    std::int32_t p0, p1;
  };

  std::int32_t push0(double v, const char* op) {
    check(v, op);
    nodes_.push_back({0.0, 0.0, -1, -1});
    return static_cast<std::int32_t>(nodes_.size() - 1);
  }
  std::int32_t push1(double v, double w, std::int32_t p, const char* op) {
    check(v, op);
    nodes_.push_back({w, 0.0, p, -1});
    return static_cast<std::int32_t>(nodes_.size() - 1);
  }
  std::int32_t push2(double v, double w0, std::int32_t p0, double w1, std::int32_t p1,
                     const char* op) {
    check(v, op);
    nodes_.push_back({w0, w1, p0, p1});
    return static_cast<std::int32_t>(nodes_.size() - 1);
  }

  std::size_t size() const { return nodes_.size(); }
  void clear() { nodes_.clear(); }

  // Adjoints of every node with respect to output node `out`.
  // The returned span is owned by the tape and valid until the next call.
  std::span<const double> gradient(std::int32_t out) {
    adj_.assign(nodes_.size(), 0.0);
    adj_[static_cast<std::size_t>(out)] = 1.0;
    for (std::int32_t i = out; i >= 0; --i) {
      const double a = adj_[static_cast<std::size_t>(i)];
      if (a == 0.0) continue;
      const Node& n = nodes_[static_cast<std::size_t>(i)];
      if (n.p0 >= 0) adj_[static_cast<std::size_t>(n.p0)] += n.w0 * a;
      if (n.p1 >= 0) adj_[static_cast<std::size_t>(n.p1)] += n.w1 * a;
    }
    return adj_;
  }

 private:
  void check(double v, const char* op) {
    if (!std::isfinite(v)) {
      throw NumericalError(std::string("non-finite value at tape node ") +
                           std::to_string(nodes_.size()) + " (op " + op + ")");
    }
  }

  std::vector<Node> nodes_;
  std::vector<double> adj_;
};

// A value recorded on a tape.
struct Var {
  Tape* tape = nullptr;
  std::int32_t idx = -1;
  double v = 0.0;
};

inline Var make_input(Tape& t, double v) { return {&t, t.push0(v, "input"), v}; }
inline Var make_const(Tape& t, double v) { return {&t, t.push0(v, "const"), v}; }

inline Var operator+(const Var& x, const Var& y) {
  return {x.tape, x.tape->push2(x.v + y.v, 1.0, x.idx, 1.0, y.idx, "add"), x.v + y.v};
}
inline Var operator+(const Var& x, double c) {
  return {x.tape, x.tape->push1(x.v + c, 1.0, x.idx, "addc"), x.v + c};
}
inline Var operator+(double c, const Var& x) { return x + c; }

inline Var operator-(const Var& x, const Var& y) {
  return {x.tape, x.tape->push2(x.v - y.v, 1.0, x.idx, -1.0, y.idx, "sub"), x.v - y.v};
}
inline Var operator-(const Var& x, double c) {
  return {x.tape, x.tape->push1(x.v - c, 1.0, x.idx, "subc"), x.v - c};
}
inline Var operator-(double c, const Var& x) {
  return {x.tape, x.tape->push1(c - x.v, -1.0, x.idx, "csub"), c - x.v};
}
inline Var operator-(const Var& x) {
  return {x.tape, x.tape->push1(-x.v, -1.0, x.idx, "neg"), -x.v};
}

inline Var operator*(const Var& x, const Var& y) {
  return {x.tape, x.tape->push2(x.v * y.v, y.v, x.idx, x.v, y.idx, "mul"), x.v * y.v};
}
inline Var operator*(const Var& x, double c) {
  return {x.tape, x.tape->push1(x.v * c, c, x.idx, "mulc"), x.v * c};
}
inline Var operator*(double c, const Var& x) { return x * c; }

inline Var operator/(const Var& x, const Var& y) {
  const double r = x.v / y.v;
  return {x.tape, x.tape->push2(r, 1.0 / y.v, x.idx, -r / y.v, y.idx, "div"), r};
}
inline Var operator/(const Var& x, double c) { return x * (1.0 / c); }
inline Var operator/(double c, const Var& x) {
  const double r = c / x.v;
  return {x.tape, x.tape->push1(r, -r / x.v, x.idx, "cdiv"), r};
}

inline Var sin(const Var& x) {
  return {x.tape, x.tape->push1(std::sin(x.v), std::cos(x.v), x.idx, "sin"), std::sin(x.v)};
}
inline Var cos(const Var& x) {
  return {x.tape, x.tape->push1(std::cos(x.v), -std::sin(x.v), x.idx, "cos"), std::cos(x.v)};
}
inline Var tanh(const Var& x) {
  const double t = std::tanh(x.v);
  return {x.tape, x.tape->push1(t, 1.0 - t * t, x.idx, "tanh"), t};
}
inline Var exp(const Var& x) {
  const double e = std::exp(x.v);
  return {x.tape, x.tape->push1(e, e, x.idx, "exp"), e};
}
inline Var log(const Var& x) {
  return {x.tape, x.tape->push1(std::log(x.v), 1.0 / x.v, x.idx, "log"), std::log(x.v)};
}
inline Var sqrt(const Var& x) {
  const double s = std::sqrt(x.v);
  return {x.tape, x.tape->push1(s, 0.5 / s, x.idx, "sqrt"), s};
}
inline Var softplus(const Var& x) {
  const double v = psid::softplus(x.v);
  const double s = 1.0 / (1.0 + std::exp(-x.v));  // logistic, d softplus/dx
  return {x.tape, x.tape->push1(v, s, x.idx, "softplus"), v};
}
inline Var sq(const Var& x) {
  return {x.tape, x.tape->push1(x.v * x.v, 2.0 * x.v, x.idx, "sq"), x.v * x.v};
}

inline double value(const Var& x) { return x.v; }
inline double value(double x) { return x; }

}  // namespace psid::ad
