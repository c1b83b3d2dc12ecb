#include "psid/bpinn.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "psid/common.hpp"
#include "psid/surrogate.hpp"

namespace psid {

namespace {

double clamp(double v, double lo, double hi) { return std::min(std::max(v, lo), hi); }

Vector prior_draw(Rng& rng, const PriorConfig& cfg, const ParticleLayout& lay) {
  Vector p(lay.dim());
  const int h = lay.hidden;
  // tempered prior draws: full-scale nets start strongly saturated and tend
  // to stall in a zero-residual basin with the data term muted
  constexpr double kThetaInitScale = 0.3;
  for (int i = 0; i < lay.theta_size(); ++i) {
    const bool bias = (i >= 2 * h && i < 3 * h) || i >= 5 * h;
    p[i] = kThetaInitScale * rng.normal(0.0, bias ? cfg.sigma_b : cfg.sigma_w);
  }
  const double dof = 2.0 * cfg.alpha;
  const double scale = std::sqrt(cfg.beta * cfg.kappa_prior / cfg.alpha);
  for (int c = 0; c < 3; ++c) {
    // clamp keeps softplus_inv well-posed; the heavy t tails would otherwise
    // put particles in regions where the likelihood gradient overflows
    // clamp the heavy t tail: particles starting far out in lambda cannot
    // traverse the (m, B)-compensation valley within the iteration budget
    double lam = clamp(rng.student_t(dof, cfg.mu_prior, scale), 0.1, 2.5);
    p[lay.lambda_off() + c] = softplus_inv(lam);
  }
  for (int c = 0; c < 2; ++c) {
    // start the data noise scales small so the data term is never muted at the
    // beginning; the particles are free to grow them during the run
    double s = clamp(std::abs(rng.cauchy(0.0, cfg.noise_scale)), 1e-2, 0.1);
    p[lay.sigma_x_off() + c] = std::log(s);
  }
  for (int c = 0; c < 2; ++c) {
    // start the physics noise scales large: the residual weight stays gentle
    // until the surrogate tracks the data, then contracts on its own. Starting
    // them small lets wrong-lambda physics flatten the net before it has seen
    // the data (an overdamped-envelope local optimum on oscillatory signals).
    double s = clamp(std::abs(rng.cauchy(0.0, cfg.noise_scale)), 0.5, 2.0);
    p[lay.sigma_h_off() + c] = std::log(s);
  }
  return p;
}

nlohmann::json norm_to_json(const NormRecord& n) {
  auto ch = [](const ChannelNorm& c) {
    return nlohmann::json{{"center", c.center}, {"scale", c.scale}};
  };
  return {{"t", ch(n.t)}, {"pm", ch(n.pm)}, {"delta", ch(n.delta)}, {"domega", ch(n.domega)}};
}

NormRecord norm_from_json(const nlohmann::json& j) {
  auto ch = [](const nlohmann::json& c) { return ChannelNorm{c.at("center"), c.at("scale")}; };
  return {ch(j.at("t")), ch(j.at("pm")), ch(j.at("delta")), ch(j.at("domega"))};
}

}  // namespace

Posterior bpinn_fit(const Dataset& ds, const BpinnOptions& opts, Rng rng,
                    const Posterior* warm_start) {
  require(opts.particles >= 1, "bpinn_fit: need at least one particle");
  require(opts.hidden >= 1, "bpinn_fit: hidden width must be positive");

  ParticleLayout lay{opts.hidden};
  FitData data = FitData::build(ds, opts.n_colloc);
  PriorConfig prior = opts.prior;

  Matrix particles(opts.particles, lay.dim());
  if (warm_start) {
    require(warm_start->layout.hidden == lay.hidden,
            "bpinn_fit: warm start hidden width mismatch");
    require(warm_start->n_particles() == opts.particles,
            "bpinn_fit: warm start particle count mismatch");
    particles = warm_start_particles(*warm_start, ds.norm);
  } else {
    for (int i = 0; i < opts.particles; ++i) {
      Rng sub = rng.substream(static_cast<std::uint64_t>(i));
      particles.row(i) = prior_draw(sub, prior, lay).transpose();
    }
  }

  if (!warm_start && opts.warmup_iters > 0) {
    // curriculum warm-up: fit the surrogate to the data alone first
    FitData data_only = data;
    data_only.residual_pts.clear();
    SvgdOptions wopts;
    wopts.iters = opts.warmup_iters;
    wopts.step = opts.step;
    wopts.parallel = opts.parallel;
    auto warm_grad = [&](std::span<const double> x, Vector& g) {
      Vector xv = Eigen::Map<const Vector>(x.data(), static_cast<Eigen::Index>(x.size()));
      double lp = log_joint_with_grad(xv, data_only, prior, lay, g);
      // only the network moves during warm-up; a free sigma_x would inflate to
      // the current misfit and dilute the data gradient before the net fits
      for (int c = lay.lambda_off(); c < lay.dim(); ++c) g[c] = 0.0;
      return lp;
    };
    // per-particle ascent (P=1 runs): repulsion would push the frozen slots
    for (int i = 0; i < opts.particles; ++i) {
      Matrix one = particles.row(i);
      particles.row(i) = svgd_run(std::move(one), warm_grad, wopts).particles.row(0);
    }
  }

  SvgdOptions sopts;
  sopts.iters = opts.iters;
  sopts.step = opts.step;
  sopts.parallel = opts.parallel;
  sopts.monitor_every = opts.monitor_every;
  sopts.monitor = opts.monitor;

  auto grad_fn = [&](std::span<const double> x, Vector& g) {
    Vector xv = Eigen::Map<const Vector>(x.data(), static_cast<Eigen::Index>(x.size()));
    return log_joint_with_grad(xv, data, prior, lay, g);
  };
  SvgdResult sres = svgd_run(std::move(particles), grad_fn, sopts);

  Posterior post;
  post.layout = lay;
  post.particles = std::move(sres.particles);
  post.norm = ds.norm;
  post.prior = prior;
  post.seed = rng.seed();
  post.iterations = opts.iters;
  post.collapsed = sres.collapsed;
  post.logjoint_trace = std::move(sres.logp_trace);
  return post;
}

LambdaSummary summarize(const Posterior& post) {
  const int np = post.n_particles();
  LambdaSummary s{};
  Matrix lam(np, 3);
  for (int i = 0; i < np; ++i) {
    Vector row = post.particles.row(i).transpose();
    auto l = lambda_physical(row, post.layout);
    for (int c = 0; c < 3; ++c) lam(i, c) = l[static_cast<std::size_t>(c)];
  }
  for (int c = 0; c < 3; ++c) {
    const double mean = lam.col(c).mean();
    s.mean[static_cast<std::size_t>(c)] = mean;
    double var = 0.0;
    if (np > 1) var = (lam.col(c).array() - mean).square().sum() / static_cast<double>(np - 1);
    s.two_sigma[static_cast<std::size_t>(c)] = 2.0 * std::sqrt(var);
  }
  return s;
}

UncertaintyReport bpinn_predict(const Posterior& post, const std::vector<double>& times,
                                double pm) {
  const int np = post.n_particles();
  const auto n = static_cast<Eigen::Index>(times.size());
  const ParticleLayout& lay = post.layout;

  UncertaintyReport rep;
  rep.times = times;
  rep.mean = Matrix::Zero(n, 2);
  rep.aleatoric = Matrix::Zero(n, 2);
  rep.epistemic = Matrix::Zero(n, 2);
  rep.total = Matrix::Zero(n, 2);

  const double s_delta = post.norm.delta.scale;
  const double s_domega = post.norm.domega.scale;
  const double c_delta = post.norm.delta.center;
  const double c_domega = post.norm.domega.center;

  Matrix pred_d(np, n), pred_w(np, n);
  double al_d = 0.0, al_w = 0.0;
  for (int i = 0; i < np; ++i) {
    Vector row = post.particles.row(i).transpose();
    std::span<const double> theta(row.data(), static_cast<std::size_t>(lay.theta_size()));
    for (Eigen::Index k = 0; k < n; ++k) {
      const double z = (times[static_cast<std::size_t>(k)] - post.norm.t.center) / post.norm.t.scale;
      const double q = (pm - post.norm.pm.center) / post.norm.pm.scale;
      auto out = mlp_forward(theta, lay.hidden, z, q);
      pred_d(i, k) = c_delta + s_delta * out[0];
      pred_w(i, k) = c_domega + s_domega * out[1];
    }
    // aleatoric: inferred normalized-unit noise std, rescaled to physical
    const double sx0 = post.prior.sigma_floor + std::exp(row[lay.sigma_x_off() + 0]);
    const double sx1 = post.prior.sigma_floor + std::exp(row[lay.sigma_x_off() + 1]);
    al_d += sx0 * sx0 * s_delta * s_delta;
    al_w += sx1 * sx1 * s_domega * s_domega;
  }
  al_d /= static_cast<double>(np);
  al_w /= static_cast<double>(np);

  for (Eigen::Index k = 0; k < n; ++k) {
    const double md = pred_d.col(k).mean();
    const double mw = pred_w.col(k).mean();
    rep.mean(k, 0) = md;
    rep.mean(k, 1) = mw;
    rep.epistemic(k, 0) = (pred_d.col(k).array() - md).square().mean();
    rep.epistemic(k, 1) = (pred_w.col(k).array() - mw).square().mean();
    rep.aleatoric(k, 0) = al_d;
    rep.aleatoric(k, 1) = al_w;
    rep.total(k, 0) = rep.aleatoric(k, 0) + rep.epistemic(k, 0);
    rep.total(k, 1) = rep.aleatoric(k, 1) + rep.epistemic(k, 1);
  }
  return rep;
}

Matrix warm_start_particles(const Posterior& checkpoint, const NormRecord& target) {
  const ParticleLayout& lay = checkpoint.layout;
  const int h = lay.hidden;
  const NormRecord& src = checkpoint.norm;

  // the net was trained on z_src = (t - c_s)/s_s; under the target map
  // z_src = (s_t/s_s) z_tgt + (c_t - c_s)/s_s, an affine shift absorbed into
  // the first layer. Same for pm. The head is remapped so that the physical
  // output is preserved: y_tgt = (c_s + s_s y_src - c_t)/s_t.
  const double at = target.t.scale / src.t.scale;
  const double bt = (target.t.center - src.t.center) / src.t.scale;
  const double ap = target.pm.scale / src.pm.scale;
  const double bp = (target.pm.center - src.pm.center) / src.pm.scale;
  const std::array<double, 2> s_src{src.delta.scale, src.domega.scale};
  const std::array<double, 2> c_src{src.delta.center, src.domega.center};
  const std::array<double, 2> s_tgt{target.delta.scale, target.domega.scale};
  const std::array<double, 2> c_tgt{target.delta.center, target.domega.center};

  Matrix out = checkpoint.particles;
  for (int i = 0; i < checkpoint.n_particles(); ++i) {
    for (int j = 0; j < h; ++j) {
      const double w_t = out(i, mlp_w1_index(h, j, 0));
      const double w_p = out(i, mlp_w1_index(h, j, 1));
      out(i, mlp_w1_index(h, j, 0)) = w_t * at;
      out(i, mlp_w1_index(h, j, 1)) = w_p * ap;
      out(i, mlp_b1_index(h, j)) += w_t * bt + w_p * bp;
    }
    for (int c = 0; c < 2; ++c) {
      const auto cc = static_cast<std::size_t>(c);
      const double r = s_src[cc] / s_tgt[cc];
      for (int j = 0; j < h; ++j) out(i, mlp_w2_index(h, c, j)) *= r;
      out(i, mlp_b2_index(h, c)) =
          (s_src[cc] * out(i, mlp_b2_index(h, c)) + c_src[cc] - c_tgt[cc]) / s_tgt[cc];
      // sigma_x is a normalized-unit scale; keep its physical meaning
      // (sigma = floor + exp(s), so the rescale acts on the effective value)
      const double fl = checkpoint.prior.sigma_floor;
      const double se = r * (fl + std::exp(out(i, lay.sigma_x_off() + c))) - fl;
      out(i, lay.sigma_x_off() + c) = std::log(std::max(se, 1e-12));
    }
    // lambda and sigma_h live in physical units already
  }
  return out;
}

void save_posterior(const std::string& path, const Posterior& post) {
  nlohmann::json j;
  j["hidden"] = post.layout.hidden;
  j["seed"] = post.seed;
  j["iterations"] = post.iterations;
  j["collapsed"] = post.collapsed;
  j["norm"] = norm_to_json(post.norm);
  j["prior"] = {{"sigma_w", post.prior.sigma_w},   {"sigma_b", post.prior.sigma_b},
                {"mu", post.prior.mu_prior},       {"kappa", post.prior.kappa_prior},
                {"alpha", post.prior.alpha},       {"beta", post.prior.beta},
                {"noise_scale", post.prior.noise_scale},
                {"sigma_floor", post.prior.sigma_floor}};
  auto particles = nlohmann::json::array();
  for (int i = 0; i < post.n_particles(); ++i) {
    auto row = nlohmann::json::array();
    for (Eigen::Index k = 0; k < post.particles.cols(); ++k) row.push_back(post.particles(i, k));
    particles.push_back(std::move(row));
  }
  j["particles"] = std::move(particles);
  j["trace"] = post.logjoint_trace;
  std::ofstream f(path);
  require(f.good(), "save_posterior: cannot open " + path);
  f << j.dump(2) << "\n";
}

Posterior load_posterior(const std::string& path) {
  std::ifstream f(path);
  require(f.good(), "load_posterior: cannot open " + path);
  nlohmann::json j;
  f >> j;
  Posterior post;
  post.layout = ParticleLayout{j.at("hidden")};
  post.seed = j.at("seed");
  post.iterations = j.at("iterations");
  post.collapsed = j.at("collapsed");
  post.norm = norm_from_json(j.at("norm"));
  const auto& pr = j.at("prior");
  post.prior = PriorConfig{pr.at("sigma_w"), pr.at("sigma_b"),     pr.at("mu"),
                           pr.at("kappa"),   pr.at("alpha"),       pr.at("beta"),
                           pr.at("noise_scale"), pr.at("sigma_floor")};
  const auto& rows = j.at("particles");
  require(!rows.empty(), "load_posterior: empty particle set");
  post.particles.resize(static_cast<Eigen::Index>(rows.size()), post.layout.dim());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    require(static_cast<int>(rows[i].size()) == post.layout.dim(),
            "load_posterior: particle dimension mismatch");
    for (int k = 0; k < post.layout.dim(); ++k)
      post.particles(static_cast<Eigen::Index>(i), k) = rows[i][static_cast<std::size_t>(k)];
  }
  post.logjoint_trace = j.at("trace").get<std::vector<double>>();
  return post;
}

}  // namespace psid
