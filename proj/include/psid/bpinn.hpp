#pragma once

#include <functional>
#include <optional>
#include <string>

#include "psid/dataset.hpp"
#include "psid/logjoint.hpp"
#include "psid/svgd.hpp"

namespace psid {

struct BpinnOptions {
  int hidden = 20;
  int particles = 30;
  int iters = 2000;
  // data-only warm-up iterations before the physics residual is enabled;
  // without it, oscillatory datasets can trap the particles in an
  // overdamped-envelope optimum where the residual weight flattens the net
  // before it has tracked the data. Skipped when warm-starting.
  int warmup_iters = 500;
  int n_colloc = 0;
  double step = 5e-2;
  bool parallel = true;
  PriorConfig prior;
  int monitor_every = 0;
  std::function<void(int iter, const Matrix& particles)> monitor;
};

struct Posterior {
  ParticleLayout layout;
  Matrix particles;  // P x layout.dim()
  NormRecord norm;
  PriorConfig prior;
  std::uint64_t seed = 0;
  int iterations = 0;
  bool collapsed = false;
  std::vector<double> logjoint_trace;

  int n_particles() const { return static_cast<int>(particles.rows()); }
};

struct LambdaSummary {
  std::array<double, 3> mean;       // m, d, B
  std::array<double, 3> two_sigma;  // 2 * sample std (ddof = 1)
};

// Per-channel predictive decomposition at the requested times, physical
// units; total = aleatoric + epistemic exactly.
struct UncertaintyReport {
  std::vector<double> times;
  Matrix mean;       // n x 2 (delta, domega)
  Matrix aleatoric;  // variances
  Matrix epistemic;
  Matrix total;
};

// SVGD fit of the joint posterior. Without warm_start, particles are drawn
// from the prior (lambda and sigma draws clamped to keep the transforms
// well-posed); with warm_start the checkpoint's particles are remapped to
// this dataset's normalization and optimizer state starts fresh.
Posterior bpinn_fit(const Dataset& ds, const BpinnOptions& opts, Rng rng,
                    const Posterior* warm_start = nullptr);

LambdaSummary summarize(const Posterior& post);

UncertaintyReport bpinn_predict(const Posterior& post, const std::vector<double>& times,
                                double pm);

// Exact affine remap of every particle's first and last layers from the
// checkpoint normalization to `target`, preserving the physical-unit map.
Matrix warm_start_particles(const Posterior& checkpoint, const NormRecord& target);

void save_posterior(const std::string& path, const Posterior& post);
Posterior load_posterior(const std::string& path);

}  // namespace psid
