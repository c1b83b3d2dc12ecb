#include "psid/logjoint.hpp"

#include <cmath>

#include "psid/common.hpp"
#include "psid/tape.hpp"

namespace psid {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

inline double sq(double x) { return x * x; }
using ad::sq;  // tape variant

template <class S>
std::array<S, 2> net_outputs(std::span<const S> theta, int hidden, double z, double q) {
  return mlp_forward(theta, hidden, z, q);
}

using detail::swing_residual;

template <class S>
S log_prior_impl(std::span<const S> p, const PriorConfig& cfg, const ParticleLayout& lay) {
  using std::exp;
  using std::log;
  using ad::exp;
  using ad::log;
  using psid::softplus;
  using ad::softplus;

  const int h = lay.hidden;
  const int nw = lay.theta_size();

  // (a) Gaussian prior over network weights and biases
  auto is_bias = [&](int i) {
    return (i >= 2 * h && i < 3 * h) || i >= 5 * h;
  };
  S lp = -0.5 * kLog2Pi - log(is_bias(0) ? cfg.sigma_b : cfg.sigma_w) -
         sq(p[0]) / (2.0 * sq(is_bias(0) ? cfg.sigma_b : cfg.sigma_w));
  for (int i = 1; i < nw; ++i) {
    const double s = is_bias(i) ? cfg.sigma_b : cfg.sigma_w;
    lp = lp + (-0.5 * kLog2Pi - std::log(s)) - sq(p[i]) / (2.0 * s * s);
  }

  // (b) marginalized normal-gamma on physical lambda + (d) softplus Jacobian
  const double dof = 2.0 * cfg.alpha;
  const double scale = std::sqrt(cfg.beta * cfg.kappa_prior / cfg.alpha);
  const double tconst = std::lgamma(0.5 * (dof + 1.0)) - std::lgamma(0.5 * dof) -
                        0.5 * std::log(dof * M_PI) - std::log(scale);
  for (int c = 0; c < 3; ++c) {
    const S& u = p[lay.lambda_off() + c];
    S lam = softplus(u);
    S zt = (lam - cfg.mu_prior) * (1.0 / scale);
    lp = lp + tconst - (0.5 * (dof + 1.0)) * log(1.0 + sq(zt) * (1.0 / dof));
    lp = lp - softplus(-1.0 * u);  // log d softplus/du
  }

  // (c) half-Cauchy priors on the noise scales; the particle stores s with
  // sigma = sigma_floor + exp(s), so the log-Jacobian is still s
  const double hc_const = std::log(2.0 / M_PI) - std::log(cfg.noise_scale);
  for (int c = 0; c < 4; ++c) {
    const S& s = p[lay.sigma_x_off() + c];
    S sigma = cfg.sigma_floor + exp(s);
    lp = lp + hc_const - log(1.0 + sq(sigma * (1.0 / cfg.noise_scale))) + s;
  }
  return lp;
}

template <class S>
S log_likelihood_impl(std::span<const S> p, const FitData& d, const ParticleLayout& lay,
                      double sigma_floor) {
  using std::exp;
  using ad::exp;
  using psid::softplus;
  using ad::softplus;

  auto theta = p.subspan(0, static_cast<std::size_t>(lay.theta_size()));
  const S& m = p[lay.lambda_off() + 0];
  const S& dd = p[lay.lambda_off() + 1];
  const S& bb = p[lay.lambda_off() + 2];
  S lam_m = softplus(m), lam_d = softplus(dd), lam_b = softplus(bb);

  const auto n_z = static_cast<double>(d.samples.size());
  const auto n_res = static_cast<double>(d.residual_pts.size());

  // Gaussian data misfit, per channel, in normalized units
  std::array<S, 2> data_sq;
  bool first = true;
  for (const auto& s : d.samples) {
    auto out = net_outputs(theta, lay.hidden, s[0], s[1]);
    auto e0 = sq(out[0] - s[2]);
    auto e1 = sq(out[1] - s[3]);
    if (first) {
      data_sq[0] = e0;
      data_sq[1] = e1;
      first = false;
    } else {
      data_sq[0] = data_sq[0] + e0;
      data_sq[1] = data_sq[1] + e1;
    }
  }

  using std::log;
  using ad::log;
  S sx0 = sigma_floor + exp(p[lay.sigma_x_off() + 0]);
  S sx1 = sigma_floor + exp(p[lay.sigma_x_off() + 1]);
  S ll = (-n_z) * (log(sx0) + log(sx1));
  ll = ll - data_sq[0] * (0.5 / sq(sx0)) - data_sq[1] * (0.5 / sq(sx1));
  if (d.residual_pts.empty()) return ll + (-0.5 * kLog2Pi * 2.0 * n_z);

  // Gaussian physics residual over all N = N_z + N_c points, physical units
  std::array<S, 2> res_sq;
  first = true;
  for (const auto& r : d.residual_pts) {
    auto hres = swing_residual(theta, lay.hidden, d.norm, d.dz_dt, r[0], r[1], r[2], lam_m, lam_d,
                            lam_b);
    auto e0 = sq(hres[0]);
    auto e1 = sq(hres[1]);
    if (first) {
      res_sq[0] = e0;
      res_sq[1] = e1;
      first = false;
    } else {
      res_sq[0] = res_sq[0] + e0;
      res_sq[1] = res_sq[1] + e1;
    }
  }

  S sh0 = sigma_floor + exp(p[lay.sigma_h_off() + 0]);
  S sh1 = sigma_floor + exp(p[lay.sigma_h_off() + 1]);
  ll = ll + (-n_res) * (log(sh0) + log(sh1));
  ll = ll - res_sq[0] * (0.5 / sq(sh0)) - res_sq[1] * (0.5 / sq(sh1));
  return ll + (-0.5 * kLog2Pi * (2.0 * n_z + 2.0 * n_res));
}

}  // namespace

FitData FitData::build(const Dataset& ds, int n_colloc) {
  require(ds.n() >= 2, "FitData: dataset must hold at least 2 samples");
  require(n_colloc >= 0, "FitData: collocation count must be non-negative");
  FitData d;
  d.norm = ds.norm;
  d.dz_dt = 1.0 / ds.norm.t.scale;
  const double pm_phys = ds.pm[0];
  const double pm_norm = (pm_phys - ds.norm.pm.center) / ds.norm.pm.scale;
  for (int i = 0; i < ds.n(); ++i) {
    d.samples.push_back({ds.t_norm(i), ds.pm_norm(i), ds.delta_norm(i), ds.domega_norm(i)});
    d.residual_pts.push_back({ds.t_norm(i), ds.pm_norm(i), ds.pm[static_cast<std::size_t>(i)]});
  }
  const double T = ds.horizon;
  for (int k = 0; k < n_colloc; ++k) {
    const double t = (n_colloc == 1) ? 0.5 * T
                                     : T * static_cast<double>(k) / static_cast<double>(n_colloc - 1);
    const double z = (t - ds.norm.t.center) / ds.norm.t.scale;
    d.residual_pts.push_back({z, pm_norm, pm_phys});
  }
  return d;
}

std::array<double, 3> lambda_physical(const Vector& particle, const ParticleLayout& lay) {
  return {softplus(particle[lay.lambda_off() + 0]), softplus(particle[lay.lambda_off() + 1]),
          softplus(particle[lay.lambda_off() + 2])};
}

Vector make_particle(const MlpParams& theta, const std::array<double, 3>& lambda_phys,
                     double sigma_x, double sigma_h) {
  ParticleLayout lay{theta.hidden};
  Vector p(lay.dim());
  for (int i = 0; i < lay.theta_size(); ++i) p[i] = theta.w[static_cast<std::size_t>(i)];
  for (int c = 0; c < 3; ++c) p[lay.lambda_off() + c] = softplus_inv(lambda_phys[static_cast<std::size_t>(c)]);
  p[lay.sigma_x_off() + 0] = std::log(sigma_x);
  p[lay.sigma_x_off() + 1] = std::log(sigma_x);
  p[lay.sigma_h_off() + 0] = std::log(sigma_h);
  p[lay.sigma_h_off() + 1] = std::log(sigma_h);
  return p;
}

double student_t_logpdf(double x, double dof, double loc, double scale) {
  const double z = (x - loc) / scale;
  return std::lgamma(0.5 * (dof + 1.0)) - std::lgamma(0.5 * dof) - 0.5 * std::log(dof * M_PI) -
         std::log(scale) - 0.5 * (dof + 1.0) * std::log1p(z * z / dof);
}

double log_prior(const Vector& particle, const PriorConfig& cfg, const ParticleLayout& lay) {
  std::span<const double> p(particle.data(), static_cast<std::size_t>(particle.size()));
  return log_prior_impl(p, cfg, lay);
}

double log_likelihood(const Vector& particle, const FitData& data, const PriorConfig& cfg,
                      const ParticleLayout& lay) {
  std::span<const double> p(particle.data(), static_cast<std::size_t>(particle.size()));
  return log_likelihood_impl(p, data, lay, cfg.sigma_floor);
}

std::array<double, 2> physics_residual(const Vector& particle, const NormRecord& norm, double t,
                                       double pm, const ParticleLayout& lay) {
  std::span<const double> p(particle.data(), static_cast<std::size_t>(particle.size()));
  auto theta = p.subspan(0, static_cast<std::size_t>(lay.theta_size()));
  auto lam = lambda_physical(particle, lay);
  const double z = (t - norm.t.center) / norm.t.scale;
  const double q = (pm - norm.pm.center) / norm.pm.scale;
  auto h = swing_residual(theta, lay.hidden, norm, 1.0 / norm.t.scale, z, q, pm, lam[0], lam[1],
                       lam[2]);
  return {h[0], h[1]};
}

double log_joint_with_grad(const Vector& particle, const FitData& data, const PriorConfig& cfg,
                           const ParticleLayout& lay, Vector& grad_out) {
  thread_local ad::Tape tape;
  tape.clear();
  std::vector<ad::Var> inputs;
  inputs.reserve(static_cast<std::size_t>(particle.size()));
  for (Eigen::Index i = 0; i < particle.size(); ++i)
    inputs.push_back(ad::make_input(tape, particle[i]));
  std::span<const ad::Var> p(inputs);
  ad::Var lp = log_prior_impl(p, cfg, lay);
  ad::Var ll = log_likelihood_impl(p, data, lay, cfg.sigma_floor);
  ad::Var total = lp + ll;
  auto adj = tape.gradient(total.idx);
  grad_out.resize(particle.size());
  for (Eigen::Index i = 0; i < particle.size(); ++i)
    grad_out[i] = adj[static_cast<std::size_t>(inputs[static_cast<std::size_t>(i)].idx)];
  if (!grad_out.allFinite()) throw NumericalError("log_joint_with_grad: non-finite gradient");
  return total.v;
}

}  // namespace psid
