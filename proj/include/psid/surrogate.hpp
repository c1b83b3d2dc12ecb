#pragma once

#include <array>
#include <string>
#include <vector>

#include "psid/mlp.hpp"
#include "psid/normalization.hpp"
#include "psid/rng.hpp"

namespace psid {

enum class InitScheme { kPriorSample, kSmallUniform };

// Parameters of the 1-hidden-layer surrogate, stored flat.
struct MlpParams {
  int hidden = 20;
  std::vector<double> w;  // length mlp_param_count(hidden)

  static MlpParams zeros(int hidden);
};

MlpParams init_params(Rng& rng, InitScheme scheme, int hidden = 20);

// Forward pass on normalized inputs.
std::array<double, 2> surrogate_forward_norm(const MlpParams& p, double t_norm, double pm_norm);

// Forward pass on raw (physical) inputs, chain-ruled through `norm`.
// Outputs stay in normalized units.
std::array<double, 2> surrogate_forward(const MlpParams& p, const NormRecord& norm, double t,
                                        double pm);

// Exact derivative of the normalized outputs with respect to raw time.
std::array<double, 2> surrogate_time_derivative(const MlpParams& p, const NormRecord& norm,
                                                double t, double pm);

// Generic physical-input evaluation used by both the public entry points and
// the derivative cross-checks; TS may be double or a forward-mode dual.
template <class TS>
auto surrogate_eval(std::span<const double> w, int hidden, const NormRecord& norm, const TS& t,
                    double pm) {
  auto z = (t - norm.t.center) * (1.0 / norm.t.scale);
  const double q = (pm - norm.pm.center) / norm.pm.scale;
  return mlp_forward(w, hidden, z, q);
}

// Checkpoint: layer shapes, flattened parameters and the normalization record
// (exact round-trip; used for transfer-learning warm starts).
void save_mlp_checkpoint(const std::string& path, const MlpParams& p, const NormRecord& norm);
std::pair<MlpParams, NormRecord> load_mlp_checkpoint(const std::string& path);

}  // namespace psid
