#pragma once

#include <optional>
#include <string>
#include <vector>

#include "psid/normalization.hpp"
#include "psid/rng.hpp"
#include "psid/simulate.hpp"

namespace psid {

// Sampled measurement set from one monitored generator (or the
// center-of-inertia aggregate), in physical units plus the normalization
// record applied before estimation.
struct Dataset {
  std::vector<double> t;
  std::vector<double> pm;
  std::vector<double> delta;
  std::vector<double> domega;
  // noise-free copies of the measured channels; reconstruction error is
  // scored against these so the metric reflects estimation quality rather
  // than the irreducible measurement noise
  std::vector<double> delta_true;
  std::vector<double> domega_true;
  NormRecord norm;

  // provenance
  std::string grid, dynamics;
  std::uint64_t seed = 0;
  double rate = 20.0;
  double horizon = 5.0;
  double noise_sigma = 0.0;
  double delta_offset = 0.0;  // subtracted from the raw angle channel
  bool coi = false;
  std::optional<std::array<double, 3>> true_lambda;

  int n() const { return static_cast<int>(t.size()); }
  double t_norm(int i) const { return (t[static_cast<std::size_t>(i)] - norm.t.center) / norm.t.scale; }
  double pm_norm(int i) const { return (pm[static_cast<std::size_t>(i)] - norm.pm.center) / norm.pm.scale; }
  double delta_norm(int i) const { return (delta[static_cast<std::size_t>(i)] - norm.delta.center) / norm.delta.scale; }
  double domega_norm(int i) const { return (domega[static_cast<std::size_t>(i)] - norm.domega.center) / norm.domega.scale; }
};

// Uniformly samples the monitored channel at `rate` over [0, T). The sampling
// period must be an integer multiple of the trajectory grid step. Gaussian
// noise of std noise_sigma is added per channel when nonzero. For all grids
// except the SMIB the angle is re-referenced to its pre-step equilibrium
// (the absolute angle only carries meaning against an infinite bus).
Dataset sample_dataset(const Trajectory& traj, const SystemModel& model, double rate, double T,
                       double noise_sigma, Rng rng, bool use_coi = false);

// <base>.csv with header t,P_m,delta,domega plus a <base>.meta.json sidecar.
void save_dataset(const std::string& base, const Dataset& ds);
Dataset load_dataset(const std::string& base);

}  // namespace psid
