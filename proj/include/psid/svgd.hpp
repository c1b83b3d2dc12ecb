#pragma once

#include <functional>
#include <span>

#include "psid/diff.hpp"

namespace psid {

// Log-density gradient callback: fills `grad` (same length as `x`) and
// returns log p(x). Must be reentrant; it is invoked from parallel workers.
using LogDensityGrad = std::function<double(std::span<const double> x, Vector& grad)>;

struct SvgdOptions {
  int iters = 2000;
  double step = 5e-2;    // base step of the adaptive optimizer
  double beta1 = 0.9;    // first-moment decay
  double beta2 = 0.999;  // squared-gradient accumulation decay
  double fudge = 1e-8;
  bool parallel = true;        // OpenMP over particles; serial path is bit-identical
  int monitor_every = 0;       // 0 disables
  std::function<void(int iter, const Matrix& particles)> monitor;
};

struct SvgdResult {
  Matrix particles;                 // P x dim
  std::vector<double> logp_trace;   // mean log-density per iteration
  bool collapsed = false;           // particles closer than 1e-10 pairwise
};

// Stein variational gradient descent with RBF kernel; bandwidth follows the
// median heuristic med^2 / (2 log(P+1)), recomputed every iteration. With a
// single particle the kernel terms vanish and the update degenerates to plain
// adaptive gradient ascent on log p.
SvgdResult svgd_run(Matrix particles, const LogDensityGrad& grad_fn, const SvgdOptions& opts);

}  // namespace psid
