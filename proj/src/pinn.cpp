#include "psid/pinn.hpp"

#include <cmath>

#include "psid/common.hpp"
#include "psid/tape.hpp"

namespace psid {

namespace {

constexpr double kEps = 1e-12;  // inside the sqrt of the Euclidean point norm

template <class S>
S pinn_loss_impl(std::span<const S> x, const FitData& d, const PinnOptions& opts, int hidden) {
  using std::sqrt;
  using ad::sqrt;
  using psid::softplus;
  using ad::softplus;
  using detail::swing_residual;

  const int nw = mlp_param_count(hidden);
  auto theta = x.subspan(0, static_cast<std::size_t>(nw));
  S lam_m = softplus(x[static_cast<std::size_t>(nw) + 0]);
  S lam_d = softplus(x[static_cast<std::size_t>(nw) + 1]);
  S lam_b = softplus(x[static_cast<std::size_t>(nw) + 2]);

  S data_term{}, res_term{};
  bool first = true;
  for (const auto& s : d.samples) {
    auto out = mlp_forward(theta, hidden, s[0], s[1]);
    auto e0 = out[0] - s[2];
    auto e1 = out[1] - s[3];
    auto contrib = (opts.loss == PinnLoss::kRmse) ? sqrt(e0 * e0 + e1 * e1 + kEps)
                                                  : 0.5 * (e0 * e0 + e1 * e1);
    data_term = first ? contrib : data_term + contrib;
    first = false;
  }
  first = true;
  for (const auto& r : d.residual_pts) {
    auto h = swing_residual(theta, hidden, d.norm, d.dz_dt, r[0], r[1], r[2], lam_m, lam_d,
                            lam_b);
    auto contrib = (opts.loss == PinnLoss::kRmse)
                       ? sqrt(h[0] * h[0] + h[1] * h[1] + kEps)
                       : 0.5 * (h[0] * h[0] + h[1] * h[1]);
    res_term = first ? contrib : res_term + contrib;
    first = false;
  }
  if (opts.loss == PinnLoss::kRmse) {
    data_term = data_term * (1.0 / static_cast<double>(d.samples.size()));
    res_term = res_term * (1.0 / static_cast<double>(d.residual_pts.size()));
  }
  return opts.data_weight * data_term + opts.residual_weight * res_term;
}

}  // namespace

double pinn_loss_with_grad(const Vector& x, const FitData& data, const PinnOptions& opts,
                           Vector& grad_out) {
  thread_local ad::Tape tape;
  tape.clear();
  std::vector<ad::Var> inputs;
  inputs.reserve(static_cast<std::size_t>(x.size()));
  for (Eigen::Index i = 0; i < x.size(); ++i) inputs.push_back(ad::make_input(tape, x[i]));
  std::span<const ad::Var> p(inputs);
  ad::Var loss = pinn_loss_impl(p, data, opts, opts.hidden);
  auto adj = tape.gradient(loss.idx);
  grad_out.resize(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i)
    grad_out[i] = adj[static_cast<std::size_t>(inputs[static_cast<std::size_t>(i)].idx)];
  if (!grad_out.allFinite()) throw NumericalError("pinn_loss_with_grad: non-finite gradient");
  return loss.v;
}

PinnResult pinn_fit(const Dataset& ds, const PinnOptions& opts, Rng rng) {
  require(opts.hidden >= 1, "pinn_fit: hidden width must be positive");
  require(opts.iters >= 0, "pinn_fit: negative iteration count");
  for (double l : opts.lambda_init) require(l > 0.0, "pinn_fit: lambda_init must be positive");

  FitData data = FitData::build(ds, opts.n_colloc);
  const int nw = mlp_param_count(opts.hidden);
  const int dim = nw + 3;

  MlpParams init = init_params(rng, InitScheme::kSmallUniform, opts.hidden);
  Vector x(dim);
  for (int i = 0; i < nw; ++i) x[i] = init.w[static_cast<std::size_t>(i)];
  for (int c = 0; c < 3; ++c) x[nw + c] = softplus_inv(opts.lambda_init[static_cast<std::size_t>(c)]);

  PinnResult res;
  res.loss_trace.reserve(static_cast<std::size_t>(opts.iters));

  Vector g(dim), mom = Vector::Zero(dim), hist = Vector::Zero(dim);
  for (int it = 0; it < opts.iters; ++it) {
    const double loss = pinn_loss_with_grad(x, data, opts, g);
    res.loss_trace.push_back(loss);
    if (opts.freeze_lambda)
      for (int c = 0; c < 3; ++c) g[nw + c] = 0.0;
    // same Adam-style rule as the Bayesian fit, descending the loss
    mom = 0.9 * mom.array() + 0.1 * g.array();
    hist = 0.999 * hist.array() + 0.001 * g.array().square();
    const double bc1 = 1.0 - std::pow(0.9, it + 1);
    const double bc2 = 1.0 - std::pow(0.999, it + 1);
    x.array() -= opts.step * (mom.array() / bc1) / (1e-8 + (hist.array() / bc2).sqrt());
    if (!x.allFinite())
      throw NumericalError("pinn_fit: parameters diverged at iteration " + std::to_string(it));
  }

  res.params.hidden = opts.hidden;
  res.params.w.assign(x.data(), x.data() + nw);
  for (int c = 0; c < 3; ++c) res.lambda[static_cast<std::size_t>(c)] = softplus(x[nw + c]);
  res.norm = ds.norm;
  res.iterations = opts.iters;
  return res;
}

}  // namespace psid
