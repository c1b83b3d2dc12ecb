#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "psid/dual.hpp"
#include "psid/tape.hpp"

namespace psid {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Gradient of a scalar-valued rule by reverse accumulation.
// F: callable as f(Tape&, std::span<const ad::Var>) -> ad::Var.
template <class F>
Vector grad(F&& f, const Vector& at) {
  ad::Tape tape;
  std::vector<ad::Var> inputs;
  inputs.reserve(static_cast<std::size_t>(at.size()));
  for (Eigen::Index i = 0; i < at.size(); ++i) inputs.push_back(ad::make_input(tape, at[i]));
  ad::Var out = f(tape, std::span<const ad::Var>(inputs));
  check_finite(out.v, "grad output");
  auto adj = tape.gradient(out.idx);
  Vector g(at.size());
  for (Eigen::Index i = 0; i < at.size(); ++i)
    g[i] = adj[static_cast<std::size_t>(inputs[static_cast<std::size_t>(i)].idx)];
  return g;
}

// Jacobian-vector product by forward accumulation.
// F: callable as f(std::span<const ad::Dual<double>>) -> std::vector<ad::Dual<double>>.
template <class F>
Vector directional_derivative(F&& f, const Vector& at, const Vector& direction) {
  require(at.size() == direction.size(), "directional_derivative: dimension mismatch");
  std::vector<ad::Dual<double>> inputs(static_cast<std::size_t>(at.size()));
  for (Eigen::Index i = 0; i < at.size(); ++i)
    inputs[static_cast<std::size_t>(i)] = {at[i], direction[i]};
  std::vector<ad::Dual<double>> out = f(std::span<const ad::Dual<double>>(inputs));
  Vector jv(static_cast<Eigen::Index>(out.size()));
  for (std::size_t i = 0; i < out.size(); ++i) {
    check_finite(out[i].a, "directional_derivative output");
    check_finite(out[i].b, "directional_derivative tangent");
    jv[static_cast<Eigen::Index>(i)] = out[i].b;
  }
  return jv;
}

}  // namespace psid
