#pragma once

#include <array>
#include <span>
#include <vector>

#include "psid/dataset.hpp"
#include "psid/diff.hpp"
#include "psid/mlp.hpp"
#include "psid/surrogate.hpp"

namespace psid {

// Priors: N(0, sigma_w/b) on network parameters; a normal-gamma scale mixture
// on the system parameters, marginalized analytically to a location-scale
// Student-t with 2*alpha dof, location mu and squared scale beta*kappa/alpha;
// half-Cauchy on the inferred noise scales.
struct PriorConfig {
  double sigma_w = 1.0;
  double sigma_b = 1.0;
  double mu_prior = 1.0;
  double kappa_prior = 25.0;
  double alpha = 1.0;  // gamma shape
  double beta = 1.0;   // gamma rate
  double noise_scale = 1.0;  // half-Cauchy scale for sigma_x and sigma_h
  // Noise scales are parameterized sigma = sigma_floor + exp(s). The floor
  // keeps the likelihood weights bounded: with an exact-interpolation surrogate
  // the residual term would otherwise drive sigma_h -> 0 and the joint density
  // to a degenerate spike.
  double sigma_floor = 5e-2;
};

// One particle: [ flattened network parameters | unconstrained lambda (m,d,B
// via softplus) | log sigma_x (delta, domega) | log sigma_h (delta, domega) ].
struct ParticleLayout {
  int hidden = 20;
  int theta_size() const { return mlp_param_count(hidden); }
  int lambda_off() const { return theta_size(); }
  int sigma_x_off() const { return theta_size() + 3; }
  int sigma_h_off() const { return theta_size() + 5; }
  int dim() const { return theta_size() + 7; }
};

// Training view of a dataset: normalized sample points plus the residual
// evaluation points (the N_z sample instants followed by N_c collocation
// points spread equidistant over [0, T]).
struct FitData {
  NormRecord norm;
  double dz_dt = 1.0;  // d(normalized t)/dt
  std::vector<std::array<double, 4>> samples;  // z, pm_norm, delta_norm, domega_norm
  std::vector<std::array<double, 3>> residual_pts;  // z, pm_norm, pm_phys

  static FitData build(const Dataset& ds, int n_colloc);
};

std::array<double, 3> lambda_physical(const Vector& particle, const ParticleLayout& lay);
Vector make_particle(const MlpParams& theta, const std::array<double, 3>& lambda_phys,
                     double sigma_x, double sigma_h);

namespace detail {

// Residual of the swing-equation regression model at one point, physical
// units; the surrogate's exact time derivative is chain-ruled through the
// normalization map. S is double or a tape variable.
template <class S>
auto swing_residual(std::span<const S> theta, int hidden, const NormRecord& norm, double dz_dt,
                    double z, double q, double pm_phys, const S& m, const S& d, const S& b) {
  using std::sin;
  using ad::sin;
  ad::Dual<double> zin{z, dz_dt};
  auto out = mlp_forward(theta, hidden, zin, q);
  auto delta_hat = norm.delta.center + norm.delta.scale * out[0].a;
  auto domega_hat = norm.domega.center + norm.domega.scale * out[1].a;
  auto ddelta_dt = norm.delta.scale * out[0].b;
  auto ddomega_dt = norm.domega.scale * out[1].b;
  auto h_delta = ddelta_dt - domega_hat;
  auto h_omega = ddomega_dt - (pm_phys - d * domega_hat - b * sin(delta_hat)) / m;
  return std::array<decltype(h_delta), 2>{h_delta, h_omega};
}

}  // namespace detail

double log_prior(const Vector& particle, const PriorConfig& cfg, const ParticleLayout& lay);
double log_likelihood(const Vector& particle, const FitData& data, const PriorConfig& cfg,
                      const ParticleLayout& lay);

// Physics residual of the swing-equation regression model, physical units.
std::array<double, 2> physics_residual(const Vector& particle, const NormRecord& norm, double t,
                                       double pm, const ParticleLayout& lay);

// Value and gradient of log_prior + log_likelihood by reverse accumulation.
double log_joint_with_grad(const Vector& particle, const FitData& data, const PriorConfig& cfg,
                           const ParticleLayout& lay, Vector& grad_out);

// Marginal Student-t log-density used for the lambda prior (exposed for the
// quadrature cross-check).
double student_t_logpdf(double x, double dof, double loc, double scale);

}  // namespace psid
