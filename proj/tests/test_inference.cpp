#include <doctest.h>

#include <cmath>
#include <cstdio>

#include "psid/bpinn.hpp"
#include "psid/harness.hpp"
#include "psid/pinn.hpp"
#include "psid/sindy.hpp"
#include "psid/surrogate.hpp"
#include "psid/svgd.hpp"

#include "helpers.hpp"

using namespace psid;
using psid::testing::toy_dataset;

namespace {

Vector random_particle(Rng& rng, const ParticleLayout& lay) {
  Vector p(lay.dim());
  for (int i = 0; i < lay.theta_size(); ++i) p[i] = rng.normal(0.0, 0.8);
  for (int c = 0; c < 3; ++c) p[lay.lambda_off() + c] = rng.normal(0.0, 0.7);
  for (int c = 0; c < 4; ++c) p[lay.sigma_x_off() + c] = rng.normal(-0.5, 0.4);
  return p;
}

double fd_rel_error(const Vector& analytic, const Vector& numeric) {
  double num = 0.0, den = 0.0;
  for (Eigen::Index i = 0; i < analytic.size(); ++i) {
    num = std::max(num, std::abs(analytic[i] - numeric[i]));
    den = std::max(den, std::abs(numeric[i]));
  }
  return num / std::max(den, 1e-12);
}

}  // namespace

TEST_CASE("log-joint gradient matches central finite differences") {
  ParticleLayout lay{6};
  Dataset ds = toy_dataset();
  FitData data = FitData::build(ds, 8);
  PriorConfig cfg;
  Rng rng(42);

  for (int rep = 0; rep < 5; ++rep) {
    Vector p = random_particle(rng, lay);
    Vector g;
    const double f0 = log_joint_with_grad(p, data, cfg, lay, g);
    CHECK(std::isfinite(f0));
    CHECK(f0 == doctest::Approx(log_prior(p, cfg, lay) + log_likelihood(p, data, cfg, lay))
                    .epsilon(1e-12));

    Vector fd(p.size());
    for (Eigen::Index i = 0; i < p.size(); ++i) {
      const double h = 1e-6 * std::max(1.0, std::abs(p[i]));
      Vector pp = p, pm = p;
      pp[i] += h;
      pm[i] -= h;
      const double fp = log_prior(pp, cfg, lay) + log_likelihood(pp, data, cfg, lay);
      const double fm = log_prior(pm, cfg, lay) + log_likelihood(pm, data, cfg, lay);
      fd[i] = (fp - fm) / (2.0 * h);
    }
    CHECK(fd_rel_error(g, fd) < 1e-5);
  }
}

TEST_CASE("pinn loss gradient matches central finite differences") {
  Dataset ds = toy_dataset();
  PinnOptions opts;
  opts.hidden = 6;
  FitData data = FitData::build(ds, 5);
  Rng rng(7);
  const int dim = mlp_param_count(opts.hidden) + 3;

  for (auto loss : {PinnLoss::kRmse, PinnLoss::kSse}) {
    opts.loss = loss;
    Vector x(dim);
    for (int i = 0; i < dim; ++i) x[i] = rng.normal(0.0, 0.6);
    Vector g;
    const double f0 = pinn_loss_with_grad(x, data, opts, g);
    CHECK(std::isfinite(f0));
    Vector fd(dim);
    for (int i = 0; i < dim; ++i) {
      const double h = 1e-6 * std::max(1.0, std::abs(x[i]));
      Vector xp = x, xm = x;
      xp[i] += h;
      xm[i] -= h;
      Vector dummy;
      fd[i] = (pinn_loss_with_grad(xp, data, opts, dummy) -
               pinn_loss_with_grad(xm, data, opts, dummy)) /
              (2.0 * h);
    }
    CHECK(fd_rel_error(g, fd) < 1e-5);
  }
}

TEST_CASE("pinn sse loss is the negative Gaussian log-likelihood up to a constant") {
  Dataset ds = toy_dataset();
  PinnOptions opts;
  opts.hidden = 5;
  opts.loss = PinnLoss::kSse;
  opts.n_colloc = 4;
  FitData data = FitData::build(ds, opts.n_colloc);
  ParticleLayout lay{opts.hidden};
  Rng rng(11);

  const int dim = mlp_param_count(opts.hidden) + 3;
  Vector x(dim);
  for (int i = 0; i < dim; ++i) x[i] = rng.normal(0.0, 0.5);

  Vector g;
  pinn_loss_with_grad(x, data, opts, g);

  PriorConfig cfg;
  cfg.sigma_floor = 0.0;  // sse equivalence needs sigma exactly 1

  // embed into a particle with unit noise scales (log sigma = 0)
  Vector p = Vector::Zero(lay.dim());
  p.head(dim) = x;
  Vector fd(dim);
  for (int i = 0; i < dim; ++i) {
    const double h = 1e-6 * std::max(1.0, std::abs(p[i]));
    Vector pp = p, pm = p;
    pp[i] += h;
    pm[i] -= h;
    fd[i] = (log_likelihood(pp, data, cfg, lay) - log_likelihood(pm, data, cfg, lay)) / (2.0 * h);
  }
  CHECK(fd_rel_error(g, -fd) < 1e-5);
}

TEST_CASE("student-t marginal matches normal-gamma quadrature") {
  // tau ~ Gamma(alpha, beta), lambda | tau ~ N(mu, kappa/tau); the marginal is
  // a location-scale t with 2 alpha dof and scale sqrt(beta kappa / alpha)
  const double alpha = 1.0, beta = 1.0, mu = 1.0, kappa = 25.0;
  const double dof = 2.0 * alpha;
  const double scale = std::sqrt(beta * kappa / alpha);
  for (double x : {-3.0, 0.0, 1.0, 2.5, 12.0}) {
    double integral = 0.0;
    const int n = 400000;
    const double tau_hi = 60.0;
    const double h = tau_hi / n;
    for (int i = 0; i < n; ++i) {
      const double tau = (i + 0.5) * h;
      const double gamma_pdf = std::pow(beta, alpha) / std::tgamma(alpha) *
                               std::pow(tau, alpha - 1.0) * std::exp(-beta * tau);
      const double var = kappa / tau;
      const double norm_pdf = std::exp(-0.5 * (x - mu) * (x - mu) / var) /
                              std::sqrt(2.0 * M_PI * var);
      integral += gamma_pdf * norm_pdf * h;
    }
    CHECK(std::exp(student_t_logpdf(x, dof, mu, scale)) ==
          doctest::Approx(integral).epsilon(1e-6));
  }
  // mode density closed form for dof = 2: 1 / (2 sqrt(2) scale)
  CHECK(student_t_logpdf(mu, 2.0, mu, scale) ==
        doctest::Approx(std::log(1.0 / (2.0 * std::sqrt(2.0) * scale))).epsilon(1e-12));
}

TEST_CASE("svgd on a 1-d gaussian recovers mean and spread") {
  const double mu = 3.0, sigma = 2.0;
  LogDensityGrad grad_fn = [&](std::span<const double> x, Vector& g) {
    g.resize(1);
    g[0] = -(x[0] - mu) / (sigma * sigma);
    return -0.5 * (x[0] - mu) * (x[0] - mu) / (sigma * sigma);
  };
  Rng rng(3);
  Matrix particles(30, 1);
  for (int i = 0; i < 30; ++i) particles(i, 0) = rng.normal(0.0, 1.0);
  SvgdOptions opts;
  opts.iters = 1500;
  opts.step = 5e-2;
  auto res = svgd_run(particles, grad_fn, opts);
  const double mean = res.particles.col(0).mean();
  const double sd = std::sqrt((res.particles.col(0).array() - mean).square().sum() / 29.0);
  CHECK(mean == doctest::Approx(mu).epsilon(0.1));
  CHECK(sd == doctest::Approx(sigma).epsilon(0.3));
  CHECK_FALSE(res.collapsed);
}

TEST_CASE("single-particle svgd equals adaptive gradient ascent") {
  LogDensityGrad grad_fn = [&](std::span<const double> x, Vector& g) {
    g.resize(2);
    g[0] = -x[0];
    g[1] = -2.0 * x[1] + 1.0;
    return -0.5 * x[0] * x[0] - x[1] * x[1] + x[1];
  };
  Matrix particles(1, 2);
  particles << 2.0, -1.5;
  SvgdOptions opts;
  opts.iters = 100;
  auto res = svgd_run(particles, grad_fn, opts);

  // reference: plain adaptive gradient ascent, same constants
  Vector x(2), mom = Vector::Zero(2), hist = Vector::Zero(2);
  x << 2.0, -1.5;
  for (int it = 0; it < opts.iters; ++it) {
    Vector g;
    grad_fn(std::span<const double>(x.data(), 2), g);
    mom = opts.beta1 * mom.array() + (1.0 - opts.beta1) * g.array();
    hist = opts.beta2 * hist.array() + (1.0 - opts.beta2) * g.array().square();
    const double bc1 = 1.0 - std::pow(opts.beta1, it + 1);
    const double bc2 = 1.0 - std::pow(opts.beta2, it + 1);
    x.array() += opts.step * (mom.array() / bc1) / (opts.fudge + (hist.array() / bc2).sqrt());
  }
  CHECK(res.particles(0, 0) == x[0]);
  CHECK(res.particles(0, 1) == x[1]);
}

TEST_CASE("parallel and serial svgd fits are bit-identical") {
  Dataset ds = toy_dataset(0.2, 0.15, 0.2, -0.1, 0.25, 20, 5.0);
  BpinnOptions opts;
  opts.hidden = 4;
  opts.particles = 6;
  opts.iters = 25;
  opts.parallel = true;
  Posterior a = bpinn_fit(ds, opts, Rng(5));
  opts.parallel = false;
  Posterior b = bpinn_fit(ds, opts, Rng(5));
  CHECK((a.particles - b.particles).cwiseAbs().maxCoeff() == 0.0);
  REQUIRE(a.logjoint_trace.size() == b.logjoint_trace.size());
  for (std::size_t i = 0; i < a.logjoint_trace.size(); ++i)
    CHECK(a.logjoint_trace[i] == b.logjoint_trace[i]);
}

TEST_CASE("predictive variance decomposition is exact and non-negative") {
  Dataset ds = toy_dataset();
  BpinnOptions opts;
  opts.hidden = 4;
  opts.particles = 8;
  opts.iters = 40;
  Posterior post = bpinn_fit(ds, opts, Rng(9));
  auto rep = bpinn_predict(post, {0.0, 1.0, 2.5, 4.9}, -0.1);
  for (Eigen::Index k = 0; k < rep.mean.rows(); ++k) {
    for (int c = 0; c < 2; ++c) {
      CHECK(rep.total(k, c) == rep.aleatoric(k, c) + rep.epistemic(k, c));
      CHECK(rep.aleatoric(k, c) >= 0.0);
      CHECK(rep.epistemic(k, c) >= 0.0);
    }
  }
}

TEST_CASE("posterior checkpoint round-trips bit-exactly") {
  Dataset ds = toy_dataset();
  BpinnOptions opts;
  opts.hidden = 4;
  opts.particles = 5;
  opts.iters = 15;
  Posterior post = bpinn_fit(ds, opts, Rng(13));
  const std::string path = "test_posterior_roundtrip.json";
  save_posterior(path, post);
  Posterior back = load_posterior(path);
  CHECK(back.layout.hidden == post.layout.hidden);
  CHECK((back.particles - post.particles).cwiseAbs().maxCoeff() == 0.0);
  CHECK(back.norm.delta.center == post.norm.delta.center);
  CHECK(back.norm.domega.scale == post.norm.domega.scale);
  CHECK(back.seed == post.seed);
  std::remove(path.c_str());
}

TEST_CASE("warm-start remap preserves the physical input-output map") {
  ParticleLayout lay{5};
  Rng rng(21);
  Posterior src;
  src.layout = lay;
  src.particles.resize(3, lay.dim());
  for (int i = 0; i < 3; ++i) src.particles.row(i) = random_particle(rng, lay).transpose();
  src.norm = {{2.5, 2.5}, {0.0, 1.0}, {0.1, 0.4}, {-0.05, 0.2}};
  NormRecord tgt{{1.0, 1.0}, {-0.05, 0.5}, {0.3, 0.9}, {0.02, 0.07}};

  Matrix remapped = warm_start_particles(src, tgt);
  for (int i = 0; i < 3; ++i) {
    Vector a = src.particles.row(i).transpose();
    Vector b = remapped.row(i).transpose();
    std::span<const double> ta(a.data(), static_cast<std::size_t>(lay.theta_size()));
    std::span<const double> tb(b.data(), static_cast<std::size_t>(lay.theta_size()));
    for (double t : {0.3, 1.7, 4.2}) {
      for (double pm : {-0.1, 0.05}) {
        auto oa = mlp_forward(ta, lay.hidden, (t - src.norm.t.center) / src.norm.t.scale,
                              (pm - src.norm.pm.center) / src.norm.pm.scale);
        auto ob = mlp_forward(tb, lay.hidden, (t - tgt.t.center) / tgt.t.scale,
                              (pm - tgt.pm.center) / tgt.pm.scale);
        const double da = src.norm.delta.center + src.norm.delta.scale * oa[0];
        const double db = tgt.delta.center + tgt.delta.scale * ob[0];
        const double wa = src.norm.domega.center + src.norm.domega.scale * oa[1];
        const double wb = tgt.domega.center + tgt.domega.scale * ob[1];
        CHECK(da == doctest::Approx(db).epsilon(1e-12));
        CHECK(wa == doctest::Approx(wb).epsilon(1e-12));
      }
    }
    // physical noise std of the data channels is preserved too
    const double sa = std::exp(a[lay.sigma_x_off()]) * src.norm.delta.scale;
    const double sb = std::exp(b[lay.sigma_x_off()]) * tgt.delta.scale;
    CHECK(sa == doctest::Approx(sb).epsilon(1e-12));
    // lambda and sigma_h live in physical units and must be untouched
    for (int c = 0; c < 3; ++c) CHECK(a[lay.lambda_off() + c] == b[lay.lambda_off() + c]);
    for (int c = 0; c < 2; ++c) CHECK(a[lay.sigma_h_off() + c] == b[lay.sigma_h_off() + c]);
  }
}

TEST_CASE("prior particle draws have the configured weight spread") {
  // monte-carlo check of the init path via the fit entry point is indirect;
  // sample the same construction directly through Rng
  Rng rng(100);
  double sum = 0.0, sum2 = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double w = rng.normal(0.0, 1.0);
    sum += w;
    sum2 += w * w;
  }
  const double mean = sum / n;
  const double sd = std::sqrt(sum2 / n - mean * mean);
  CHECK(sd > 0.97);
  CHECK(sd < 1.03);
  CHECK(std::abs(mean) < 0.03);
}

TEST_CASE("sindy recovers the swing parameters from clean data") {
  Dataset ds = toy_dataset(0.4, 0.15, 0.2, -0.1, 0.25268, 100, 5.0);
  auto res = sindy_fit(ds);
  CHECK(res.lambda[0] == doctest::Approx(0.4).epsilon(2e-3));
  CHECK(res.lambda[1] == doctest::Approx(0.15).epsilon(2e-2));
  CHECK(res.lambda[2] == doctest::Approx(0.2).epsilon(2e-3));
}

TEST_CASE("sindy threshold removes an inactive damping term") {
  Dataset ds = toy_dataset(0.4, 1e-12, 0.2, -0.1, 0.25268, 100, 5.0);
  SindyOptions opts;
  opts.threshold = 0.05;
  auto res = sindy_fit(ds, opts);
  CHECK(res.xi[1] == 0.0);
  CHECK(res.lambda[0] == doctest::Approx(0.4).epsilon(2e-3));
  CHECK(res.lambda[1] == 0.0);
}

TEST_CASE("sindy rejects a non-positive inertia coefficient") {
  Dataset ds = toy_dataset();
  for (auto& v : ds.pm) v = -v;  // flips the sign of the P_m column
  CHECK_THROWS_AS(sindy_fit(ds), NumericalError);
}

TEST_CASE("finite differences are second order") {
  auto build = [](int n) {
    std::vector<double> t(static_cast<std::size_t>(n)), y(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      t[static_cast<std::size_t>(i)] = i * (1.0 / (n - 1));
      y[static_cast<std::size_t>(i)] = std::sin(3.0 * t[static_cast<std::size_t>(i)]);
    }
    auto dy = finite_diff(t, y);
    double err = 0.0;
    for (int i = 0; i < n; ++i)
      err = std::max(err,
                     std::abs(dy[static_cast<std::size_t>(i)] -
                              3.0 * std::cos(3.0 * t[static_cast<std::size_t>(i)])));
    return err;
  };
  const double e1 = build(51), e2 = build(101);
  CHECK(e1 / e2 > 3.0);  // halving h cuts the error by ~4
  CHECK(e1 / e2 < 5.0);

  std::vector<double> t{0.0, 0.1, 0.3}, y{0.0, 0.0, 0.0};
  CHECK_THROWS_AS(finite_diff(t, y), ConfigError);
}
