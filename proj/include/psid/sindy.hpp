#pragma once

#include <vector>

#include "psid/dataset.hpp"
#include "psid/diff.hpp"

namespace psid {

struct SindyOptions {
  double threshold = 0.0;  // sparsity threshold nu; 0 disables thresholding
  int max_sweeps = 10;
};

struct SindyResult {
  std::array<double, 3> xi;      // coefficients of [P_m, domega, sin delta] in d(domega)/dt
  std::array<double, 3> lambda;  // recovered m, d, B
};

// Second-order finite-difference derivative on a uniform grid (central in the
// interior, one-sided at the ends). Throws on non-uniform spacing.
std::vector<double> finite_diff(const std::vector<double>& t, const std::vector<double>& y);

// Regression of the finite-differenced acceleration on the physics library
// {P_m, domega, sin delta}; with threshold > 0, sequentially-thresholded
// least squares. Recovers m = 1/xi_1, d = -xi_2/xi_1, B = -xi_3/xi_1 and
// throws NumericalError when xi_1 <= 0 (no physically meaningful inertia).
SindyResult sindy_fit(const Dataset& ds, const SindyOptions& opts = {});

}  // namespace psid
