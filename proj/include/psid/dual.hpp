#pragma once

#include <cmath>
#include <type_traits>

#include "psid/tape.hpp"

namespace psid::ad {

// Forward-accumulation pair (value, tangent). The scalar type S may be plain
// double or a tape Var, so a single evaluation can carry the input tangent
// while remaining differentiable in reverse mode with respect to parameters.
template <class S>
struct Dual {
  S a{};  // value
  S b{};  // tangent
};

template <class T>
struct is_dual : std::false_type {};
template <class S>
struct is_dual<Dual<S>> : std::true_type {};

template <class T>
concept ScalarLike = !is_dual<std::decay_t<T>>::value;

// Tangents never get promoted double -> Var implicitly (that would need a
// tape const node); mixed expressions must keep the tangent type unchanged.
template <class R, class S>
R tangent_cast(const S& b) {
  static_assert(std::is_same_v<R, S>, "unsupported scalar promotion of a dual tangent");
  return b;
}

// --- addition ---
template <class S, class T>
auto operator+(const Dual<S>& x, const Dual<T>& y) {
  using R = decltype(x.a + y.a);
  return Dual<R>{x.a + y.a, x.b + y.b};
}
template <class S, ScalarLike T>
auto operator+(const Dual<S>& x, const T& c) {
  using R = decltype(x.a + c);
  return Dual<R>{x.a + c, tangent_cast<R>(x.b)};
}
template <ScalarLike T, class S>
auto operator+(const T& c, const Dual<S>& x) {
  return x + c;
}

// --- subtraction ---
template <class S, class T>
auto operator-(const Dual<S>& x, const Dual<T>& y) {
  using R = decltype(x.a - y.a);
  return Dual<R>{x.a - y.a, x.b - y.b};
}
template <class S, ScalarLike T>
auto operator-(const Dual<S>& x, const T& c) {
  using R = decltype(x.a - c);
  return Dual<R>{x.a - c, tangent_cast<R>(x.b)};
}
template <ScalarLike T, class S>
auto operator-(const T& c, const Dual<S>& x) {
  using R = decltype(c - x.a);
  return Dual<R>{c - x.a, tangent_cast<R>(-x.b)};
}
template <class S>
Dual<S> operator-(const Dual<S>& x) {
  return {-x.a, -x.b};
}

// --- multiplication ---
template <class S, class T>
auto operator*(const Dual<S>& x, const Dual<T>& y) {
  using R = decltype(x.a * y.a);
  return Dual<R>{x.a * y.a, x.a * y.b + x.b * y.a};
}
template <class S, ScalarLike T>
auto operator*(const Dual<S>& x, const T& c) {
  using R = decltype(x.a * c);
  return Dual<R>{x.a * c, x.b * c};
}
template <ScalarLike T, class S>
auto operator*(const T& c, const Dual<S>& x) {
  using R = decltype(c * x.a);
  return Dual<R>{c * x.a, c * x.b};
}

// --- division ---
template <class S, class T>
auto operator/(const Dual<S>& x, const Dual<T>& y) {
  using R = decltype(x.a / y.a);
  R inv = 1.0 / y.a;
  R q = x.a * inv;
  return Dual<R>{q, (x.b - q * y.b) * inv};
}
template <class S, ScalarLike T>
auto operator/(const Dual<S>& x, const T& c) {
  using R = decltype(x.a / c);
  return Dual<R>{x.a / c, x.b / c};
}
template <ScalarLike T, class S>
auto operator/(const T& c, const Dual<S>& x) {
  using R = decltype(c / x.a);
  R q = c / x.a;
  return Dual<R>{q, -q / x.a * x.b};
}

// --- elementary functions ---
using std::cos;
using std::exp;
using std::log;
using std::sin;
using std::sqrt;
using std::tanh;

template <class S>
Dual<S> sin(const Dual<S>& x) {
  return {sin(x.a), x.b * cos(x.a)};
}
template <class S>
Dual<S> cos(const Dual<S>& x) {
  return {cos(x.a), -1.0 * (x.b * sin(x.a))};
}
template <class S>
Dual<S> tanh(const Dual<S>& x) {
  S t = tanh(x.a);
  return {t, x.b * (1.0 - t * t)};
}
template <class S>
Dual<S> exp(const Dual<S>& x) {
  S e = exp(x.a);
  return {e, x.b * e};
}
template <class S>
Dual<S> log(const Dual<S>& x) {
  return {log(x.a), x.b / x.a};
}
template <class S>
Dual<S> sqrt(const Dual<S>& x) {
  S s = sqrt(x.a);
  return {s, x.b / (2.0 * s)};
}

template <class S>
auto value(const Dual<S>& x) {
  return value(x.a);
}

}  // namespace psid::ad
