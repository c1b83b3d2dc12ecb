#include "psid/sindy.hpp"

#include <cmath>

#include "psid/common.hpp"
#include "psid/linalg.hpp"

namespace psid {

std::vector<double> finite_diff(const std::vector<double>& t, const std::vector<double>& y) {
  const auto n = t.size();
  require(n >= 3 && y.size() == n, "finite_diff: need >= 3 points on matching grids");
  const double h = t[1] - t[0];
  require(h > 0.0, "finite_diff: time must be increasing");
  for (std::size_t i = 1; i + 1 < n; ++i)
    require(std::abs((t[i + 1] - t[i]) - h) < 1e-9 * std::max(1.0, std::abs(h)),
            "finite_diff: grid must be uniform");

  std::vector<double> dy(n);
  dy[0] = (-3.0 * y[0] + 4.0 * y[1] - y[2]) / (2.0 * h);
  for (std::size_t i = 1; i + 1 < n; ++i) dy[i] = (y[i + 1] - y[i - 1]) / (2.0 * h);
  dy[n - 1] = (3.0 * y[n - 1] - 4.0 * y[n - 2] + y[n - 3]) / (2.0 * h);
  return dy;
}

SindyResult sindy_fit(const Dataset& ds, const SindyOptions& opts) {
  require(opts.threshold >= 0.0, "sindy_fit: threshold must be non-negative");
  const auto n = static_cast<Eigen::Index>(ds.t.size());
  require(n >= 3, "sindy_fit: need at least 3 samples");

  auto ddomega = finite_diff(ds.t, ds.domega);
  Matrix lib(n, 3);
  Vector rhs(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    lib(i, 0) = ds.pm[k];
    lib(i, 1) = ds.domega[k];
    lib(i, 2) = std::sin(ds.delta[k]);
    rhs[i] = ddomega[k];
  }

  std::array<bool, 3> active{true, true, true};
  Vector xi = Vector::Zero(3);
  for (int sweep = 0; sweep < std::max(1, opts.max_sweeps); ++sweep) {
    std::vector<int> idx;
    for (int c = 0; c < 3; ++c)
      if (active[static_cast<std::size_t>(c)]) idx.push_back(c);
    require(!idx.empty(), "sindy_fit: thresholding removed every library term");

    Matrix sub(n, static_cast<Eigen::Index>(idx.size()));
    for (std::size_t c = 0; c < idx.size(); ++c)
      sub.col(static_cast<Eigen::Index>(c)) = lib.col(idx[c]);
    Vector coef = least_squares(sub, rhs);

    xi.setZero();
    for (std::size_t c = 0; c < idx.size(); ++c) xi[idx[c]] = coef[static_cast<Eigen::Index>(c)];
    if (opts.threshold == 0.0) break;

    bool changed = false;
    for (int c = 0; c < 3; ++c) {
      if (active[static_cast<std::size_t>(c)] && std::abs(xi[c]) < opts.threshold) {
        active[static_cast<std::size_t>(c)] = false;
        xi[c] = 0.0;
        changed = true;
      }
    }
    if (!changed) break;
  }

  SindyResult res;
  for (int c = 0; c < 3; ++c) res.xi[static_cast<std::size_t>(c)] = xi[c];
  if (xi[0] <= 0.0)
    throw NumericalError("sindy_fit: P_m coefficient is not positive; cannot recover inertia");
  res.lambda = {1.0 / xi[0], -xi[1] / xi[0], -xi[2] / xi[0]};
  return res;
}

}  // namespace psid
