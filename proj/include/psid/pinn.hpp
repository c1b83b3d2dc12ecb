#pragma once

#include <string>

#include "psid/dataset.hpp"
#include "psid/logjoint.hpp"
#include "psid/surrogate.hpp"

namespace psid {

enum class PinnLoss {
  kRmse,  // mean per-point Euclidean error norm, data and residual terms
  kSse    // half sum of squares; matches the Gaussian log-likelihood shape
};

struct PinnOptions {
  int hidden = 20;
  int iters = 2000;
  int n_colloc = 0;
  double step = 1e-2;
  double data_weight = 1.0;
  double residual_weight = 1.0;
  PinnLoss loss = PinnLoss::kRmse;
  bool freeze_lambda = false;
  std::array<double, 3> lambda_init{1.0, 1.0, 1.0};
};

struct PinnResult {
  MlpParams params;
  std::array<double, 3> lambda;  // m, d, B
  NormRecord norm;
  std::vector<double> loss_trace;
  int iterations = 0;
};

// Deterministic point-estimate baseline: one network plus lambda, trained by
// the same adaptive gradient rule as the Bayesian fit but descending a
// composite data + physics loss.
PinnResult pinn_fit(const Dataset& ds, const PinnOptions& opts, Rng rng);

// Loss and gradient of the PINN objective at [theta | unconstrained lambda];
// exposed so tests can compare it against the Gaussian likelihood.
double pinn_loss_with_grad(const Vector& x, const FitData& data, const PinnOptions& opts,
                           Vector& grad_out);

}  // namespace psid
