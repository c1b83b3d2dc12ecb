#pragma once

#include <cmath>
#include <vector>

#include "psid/dataset.hpp"
#include "psid/ode.hpp"

namespace psid::testing {

// Synthetic SMIB-style dataset generated directly from the two-state swing
// model, bypassing the grid simulator (keeps the inference tests independent
// of gridsim).
inline Dataset toy_dataset(double m = 0.2, double d = 0.15, double b = 0.2, double pm = -0.1,
                           double delta0 = 0.25268025514196923, int n_z = 40, double T = 5.0) {
  DerivFn deriv = [&](double, const Vector& x) {
    Vector dx(2);
    dx[0] = x[1];
    dx[1] = (pm - d * x[1] - b * std::sin(x[0])) / m;
    return dx;
  };
  Vector x0(2);
  x0[0] = delta0;
  x0[1] = 0.0;
  const int sub = 100;
  const double dt = T / static_cast<double>(n_z * sub);
  auto pts = rk4_integrate(deriv, x0, 0.0, T, dt);

  Dataset ds;
  ds.grid = "smib";
  ds.dynamics = "toy";
  ds.horizon = T;
  ds.rate = static_cast<double>(n_z) / T;
  ds.true_lambda = std::array<double, 3>{m, d, b};
  for (int k = 0; k < n_z; ++k) {
    const auto row = static_cast<std::size_t>(k) * static_cast<std::size_t>(sub);
    ds.t.push_back(pts[row].t);
    ds.pm.push_back(pm);
    ds.delta.push_back(pts[row].x[0]);
    ds.domega.push_back(pts[row].x[1]);
  }
  auto minmax = [](const std::vector<double>& v) {
    double lo = v[0], hi = v[0];
    for (double x : v) {
      lo = std::min(lo, x);
      hi = std::max(hi, x);
    }
    const double s = 0.5 * (hi - lo);
    return ChannelNorm{0.5 * (lo + hi), s < 1e-12 ? 1.0 : s};
  };
  ds.norm.t = {T / 2.0, T / 2.0};
  ds.norm.pm = {0.0, 1.0};
  ds.norm.delta = minmax(ds.delta);
  ds.norm.domega = minmax(ds.domega);
  return ds;
}

}  // namespace psid::testing
