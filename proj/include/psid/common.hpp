#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace psid {

// Bad user input: unknown grid label, malformed file, incompatible shapes.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Numerical failure: divergence, singular solve, non-finite intermediate.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw ConfigError(msg);
}

inline void check_finite(double v, const char* where) {
  if (!std::isfinite(v)) throw NumericalError(std::string("non-finite value in ") + where);
}

inline double softplus(double x) {
  return x > 30.0 ? x : std::log1p(std::exp(x));
}

inline double softplus_inv(double y) {
  // inverse of log(1+e^x); y must be > 0
  return y > 30.0 ? y : std::log(std::expm1(y));
}

}  // namespace psid
