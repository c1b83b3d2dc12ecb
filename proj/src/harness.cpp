#include "psid/harness.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "psid/common.hpp"
#include "psid/grid.hpp"
#include "psid/ode.hpp"
#include "psid/simulate.hpp"

namespace psid {

namespace {

std::string fmt(double v) {
  char buf[40];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, p);
}

// Scored against the noise-free channel in physical units; the denominator
// floor is a fraction of the channel peak so the metric does not depend on
// the noise realization through the normalization record.
double channel_mape(const Dataset& ds, const Reconstruction& rec, bool domega, double floor) {
  const auto& raw = domega ? ds.domega_true : ds.delta_true;
  const auto& hat = domega ? rec.domega : rec.delta;
  double peak = 0.0;
  for (double v : raw) peak = std::max(peak, std::abs(v));
  return mape(raw, hat, std::max(floor * peak, 1e-12));
}

std::array<double, 3> lambda_mean(const Matrix& particles, const ParticleLayout& lay) {
  std::array<double, 3> mean{0.0, 0.0, 0.0};
  for (Eigen::Index i = 0; i < particles.rows(); ++i) {
    Vector row = particles.row(i).transpose();
    auto l = lambda_physical(row, lay);
    for (int c = 0; c < 3; ++c) mean[static_cast<std::size_t>(c)] += l[static_cast<std::size_t>(c)];
  }
  for (auto& v : mean) v /= static_cast<double>(particles.rows());
  return mean;
}

double cell_score(const ExperimentConfig& cfg, const Dataset& ds,
                  const std::array<double, 3>& lambda) {
  Reconstruction rec = reconstruct(lambda, ds);
  return 0.5 * (channel_mape(ds, rec, false, cfg.mape_floor) +
                channel_mape(ds, rec, true, cfg.mape_floor));
}

BpinnOptions bpinn_options(const ExperimentConfig& cfg) {
  BpinnOptions o;
  o.hidden = cfg.hidden;
  o.particles = cfg.particles;
  o.iters = cfg.iterations;
  o.n_colloc = cfg.n_c;
  o.step = cfg.step;
  o.prior = cfg.prior;
  return o;
}

}  // namespace

std::string method_name(Method m) {
  switch (m) {
    case Method::kBpinn: return "bpinn";
    case Method::kPinn: return "pinn";
    case Method::kSindy: return "sindy";
  }
  return "?";
}

Method parse_method(const std::string& s) {
  if (s == "bpinn") return Method::kBpinn;
  if (s == "pinn") return Method::kPinn;
  if (s == "sindy") return Method::kSindy;
  throw ConfigError("unknown method '" + s + "' (expected bpinn, pinn or sindy)");
}

Reconstruction reconstruct(const std::array<double, 3>& lambda, const Dataset& ds) {
  for (double l : lambda) require(l > 0.0, "reconstruct: lambda must be positive componentwise");
  require(ds.n() >= 2, "reconstruct: dataset too short");
  const double m = lambda[0], d = lambda[1], b = lambda[2];
  const double pm = ds.pm[0];

  DerivFn deriv = [&](double, const Vector& x) {
    Vector dx(2);
    dx[0] = x[1];
    dx[1] = (pm - d * x[1] - b * std::sin(x[0])) / m;
    return dx;
  };
  // the trajectory starts from the known pre-disturbance operating point, so
  // the initial condition is protocol metadata rather than a noisy sample
  Vector x0(2);
  x0[0] = ds.delta_true[0];
  x0[1] = ds.domega_true[0];

  // integration grid fine enough that every sample instant is hit exactly
  const double period = ds.t[1] - ds.t[0];
  const int substeps = 50;
  const double dt = period / substeps;
  auto pts = rk4_integrate(deriv, x0, ds.t[0], ds.t.back(), dt);

  Reconstruction rec;
  rec.rotating = std::abs(pm) > b;
  for (int i = 0; i < ds.n(); ++i) {
    const auto row = static_cast<std::size_t>(i) * static_cast<std::size_t>(substeps);
    require(row < pts.size(), "reconstruct: sampling grid mismatch");
    rec.t.push_back(pts[row].t);
    rec.delta.push_back(pts[row].x[0]);
    rec.domega.push_back(pts[row].x[1]);
  }
  return rec;
}

double mape(const std::vector<double>& x, const std::vector<double>& xhat, double floor) {
  require(!x.empty(), "mape: empty input");
  require(x.size() == xhat.size(), "mape: length mismatch");
  require(floor > 0.0, "mape: floor must be positive");
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i)
    acc += std::abs(x[i] - xhat[i]) / std::max(std::abs(x[i]), floor);
  return 100.0 * acc / static_cast<double>(x.size());
}

// FNV-1a, so the same seed yields independent noise streams per scenario
std::uint64_t scenario_tag(const std::string& grid, const std::string& dynamics) {
  std::uint64_t h = 1469598103934665603ull;
  for (char c : grid + "/" + dynamics) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ull;
  }
  return h;
}

Dataset make_dataset(const ExperimentConfig& cfg) {
  require(cfg.n_z >= 2, "make_dataset: N_z must be >= 2");
  Rng rng = Rng(cfg.seed).substream(scenario_tag(cfg.grid, cfg.dynamics));
  SystemModel model = build_scenario(cfg.grid, cfg.dynamics, rng.substream(1));
  auto ss = steady_state(model);
  const double dpm = cfg.step_is_delta ? model.step_pm : model.step_pm - ss.pm0;
  Trajectory traj = simulate(model, ss, dpm, model.horizon, model.dt);
  const double rate = static_cast<double>(cfg.n_z) / model.horizon;
  return sample_dataset(traj, model, rate, model.horizon, cfg.noise_sigma, rng.substream(2));
}

ResultRecord run_cell(const ExperimentConfig& cfg, const Dataset& ds, Posterior* posterior_out) {
  ResultRecord rec;
  rec.config = cfg;
  const auto t_start = std::chrono::steady_clock::now();
  try {
    switch (cfg.method) {
      case Method::kBpinn: {
        std::optional<Posterior> warm;
        if (cfg.transfer_source) warm = load_posterior(*cfg.transfer_source);
        Posterior post = bpinn_fit(ds, bpinn_options(cfg), Rng(cfg.seed).substream(3),
                                   warm ? &*warm : nullptr);
        auto s = summarize(post);
        rec.lambda = s.mean;
        rec.two_sigma = s.two_sigma;
        rec.iterations_used = post.iterations;
        if (posterior_out) *posterior_out = std::move(post);
        break;
      }
      case Method::kPinn: {
        PinnOptions o;
        o.hidden = cfg.hidden;
        o.iters = cfg.iterations;
        o.n_colloc = cfg.n_c;
        o.step = cfg.step;
        PinnResult pr = pinn_fit(ds, o, Rng(cfg.seed).substream(3));
        rec.lambda = pr.lambda;
        rec.iterations_used = pr.iterations;
        break;
      }
      case Method::kSindy: {
        SindyResult sr = sindy_fit(ds);
        rec.lambda = sr.lambda;
        rec.iterations_used = 0;
        break;
      }
    }
    Reconstruction r = reconstruct(rec.lambda, ds);
    rec.mape_delta = channel_mape(ds, r, false, cfg.mape_floor);
    rec.mape_domega = channel_mape(ds, r, true, cfg.mape_floor);
    rec.rotating = r.rotating;
  } catch (const std::exception& e) {
    rec.error = e.what();
  }
  rec.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return rec;
}

std::vector<ResultRecord> run_comparison(const std::vector<std::string>& grids,
                                         const std::vector<std::string>& dynamics,
                                         const std::vector<Method>& methods,
                                         const std::vector<std::uint64_t>& seeds,
                                         const ExperimentConfig& base) {
  std::vector<ResultRecord> out;
  for (const auto& g : grids) {
    for (const auto& dyn : dynamics) {
      for (std::uint64_t seed : seeds) {
        ExperimentConfig cfg = base;
        cfg.grid = g;
        cfg.dynamics = dyn;
        cfg.seed = seed;
        std::optional<Dataset> ds;
        std::string ds_error;
        try {
          ds = make_dataset(cfg);
        } catch (const std::exception& e) {
          ds_error = e.what();
        }
        for (Method m : methods) {
          cfg.method = m;
          if (!ds) {
            ResultRecord rec;
            rec.config = cfg;
            rec.error = ds_error;
            out.push_back(std::move(rec));
            continue;
          }
          out.push_back(run_cell(cfg, *ds));
        }
      }
    }
  }
  return out;
}

std::vector<ResultRecord> run_prior_sweep(const std::vector<double>& mu_grid,
                                          const std::vector<double>& kappa_grid,
                                          const ExperimentConfig& base) {
  require(!mu_grid.empty() && !kappa_grid.empty(), "run_prior_sweep: grids must be non-empty");
  ExperimentConfig cfg = base;
  cfg.method = Method::kBpinn;
  std::vector<ResultRecord> out;
  std::optional<Dataset> ds;
  std::string ds_error;
  try {
    ds = make_dataset(cfg);
  } catch (const std::exception& e) {
    ds_error = e.what();
  }
  for (double mu : mu_grid) {
    for (double kappa : kappa_grid) {
      cfg.prior = base.prior;
      cfg.prior.mu_prior = mu;
      cfg.prior.kappa_prior = kappa;
      if (!ds) {
        ResultRecord rec;
        rec.config = cfg;
        rec.error = ds_error;
        out.push_back(std::move(rec));
        continue;
      }
      out.push_back(run_cell(cfg, *ds));
    }
  }
  return out;
}

std::vector<ResultRecord> run_sample_sweep(const std::vector<int>& n_z_grid,
                                           const std::vector<int>& n_c_multipliers,
                                           const ExperimentConfig& base) {
  ExperimentConfig cfg = base;
  cfg.method = Method::kBpinn;

  // one trajectory; only the sampling and collocation vary between cells
  Rng rng = Rng(cfg.seed).substream(scenario_tag(cfg.grid, cfg.dynamics));
  SystemModel model = build_scenario(cfg.grid, cfg.dynamics, rng.substream(1));
  auto ss = steady_state(model);
  const double dpm = cfg.step_is_delta ? model.step_pm : model.step_pm - ss.pm0;
  Trajectory traj = simulate(model, ss, dpm, model.horizon, model.dt);

  std::vector<ResultRecord> out;
  for (int n_z : n_z_grid) {
    for (int mult : n_c_multipliers) {
      cfg.n_z = n_z;
      cfg.n_c = mult * n_z;
      ResultRecord rec;
      rec.config = cfg;
      try {
        const double rate = static_cast<double>(n_z) / model.horizon;
        Dataset ds = sample_dataset(traj, model, rate, model.horizon, cfg.noise_sigma,
                                    rng.substream(2));
        rec = run_cell(cfg, ds);
      } catch (const std::exception& e) {
        rec.error = e.what();
      }
      out.push_back(std::move(rec));
    }
  }
  return out;
}

TransferResult run_transfer(const ExperimentConfig& source, int pretrain_iters,
                            const ExperimentConfig& target,
                            const std::vector<int>& iteration_grid) {
  require(!iteration_grid.empty(), "run_transfer: iteration grid must be non-empty");
  require(std::is_sorted(iteration_grid.begin(), iteration_grid.end()),
          "run_transfer: iteration grid must be increasing");
  require(pretrain_iters >= 0, "run_transfer: negative pretrain iteration count");

  // pretrain on the source scenario
  ExperimentConfig src = source;
  src.method = Method::kBpinn;
  src.iterations = pretrain_iters;
  Dataset src_ds = make_dataset(src);
  Posterior pretrained = bpinn_fit(src_ds, bpinn_options(src), Rng(src.seed).substream(3));

  ExperimentConfig tgt = target;
  tgt.method = Method::kBpinn;
  Dataset tgt_ds = make_dataset(tgt);

  TransferResult res;
  res.iteration_grid = iteration_grid;

  auto curve = [&](const Posterior* warm) {
    std::vector<double> mapes;
    ParticleLayout lay{tgt.hidden};
    BpinnOptions o = bpinn_options(tgt);
    o.iters = iteration_grid.back();
    o.monitor_every = 1;
    std::size_t next = 0;
    o.monitor = [&](int iter, const Matrix& particles) {
      while (next < iteration_grid.size() && iteration_grid[next] == iter) {
        mapes.push_back(cell_score(tgt, tgt_ds, lambda_mean(particles, lay)));
        ++next;
      }
    };
    bpinn_fit(tgt_ds, o, Rng(tgt.seed).substream(3), warm);
    require(mapes.size() == iteration_grid.size(),
            "run_transfer: iteration grid exceeds the fit length");
    return mapes;
  };
  res.scratch_mape = curve(nullptr);
  res.warm_mape = curve(&pretrained);

  const double target_mape = 1.1 * res.scratch_mape.back();
  auto first_at_target = [&](const std::vector<double>& curve_mape) {
    for (std::size_t i = 0; i < curve_mape.size(); ++i)
      if (curve_mape[i] <= target_mape) return res.iteration_grid[i];
    return -1;
  };
  res.scratch_iters_to_target = first_at_target(res.scratch_mape);
  res.warm_iters_to_target = first_at_target(res.warm_mape);
  return res;
}

void write_results_csv(const std::string& path, const std::vector<ResultRecord>& records) {
  std::ofstream f(path);
  require(f.good(), "write_results_csv: cannot open " + path);
  f << "grid,dynamics,method,seed,N_z,N_c,iterations,mu_prior,kappa_prior,noise_sigma,"
       "m,d,B,two_sigma_m,two_sigma_d,two_sigma_B,mape_delta,mape_domega,rotating,error\n";
  for (const auto& r : records) {
    const auto& c = r.config;
    f << c.grid << "," << c.dynamics << "," << method_name(c.method) << "," << c.seed << ","
      << c.n_z << "," << c.n_c << "," << c.iterations << "," << fmt(c.prior.mu_prior) << ","
      << fmt(c.prior.kappa_prior) << "," << fmt(c.noise_sigma) << "," << fmt(r.lambda[0]) << ","
      << fmt(r.lambda[1]) << "," << fmt(r.lambda[2]) << "," << fmt(r.two_sigma[0]) << ","
      << fmt(r.two_sigma[1]) << "," << fmt(r.two_sigma[2]) << "," << fmt(r.mape_delta) << ","
      << fmt(r.mape_domega) << "," << (r.rotating ? 1 : 0) << ",\"" << r.error << "\"\n";
  }
}

void write_manifest(const std::string& path, const std::vector<ResultRecord>& records) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : records) {
    const auto& c = r.config;
    nlohmann::json j;
    j["config"] = {{"grid", c.grid},
                   {"dynamics", c.dynamics},
                   {"seed", c.seed},
                   {"method", method_name(c.method)},
                   {"N_z", c.n_z},
                   {"N_c", c.n_c},
                   {"iterations", c.iterations},
                   {"particles", c.particles},
                   {"hidden", c.hidden},
                   {"step", c.step},
                   {"noise_sigma", c.noise_sigma},
                   {"mape_floor", c.mape_floor},
                   {"prior",
                    {{"mu", c.prior.mu_prior},
                     {"kappa", c.prior.kappa_prior},
                     {"alpha", c.prior.alpha},
                     {"beta", c.prior.beta},
                     {"sigma_w", c.prior.sigma_w},
                     {"sigma_b", c.prior.sigma_b},
                     {"noise_scale", c.prior.noise_scale}}}};
    if (c.transfer_source) j["config"]["transfer_source"] = *c.transfer_source;
    j["lambda"] = r.lambda;
    j["two_sigma"] = r.two_sigma;
    j["mape_delta"] = r.mape_delta;
    j["mape_domega"] = r.mape_domega;
    j["rotating"] = r.rotating;
    j["wall_time_s"] = r.wall_time_s;
    j["error"] = r.error;
    arr.push_back(std::move(j));
  }
  std::ofstream f(path);
  require(f.good(), "write_manifest: cannot open " + path);
  f << arr.dump(2) << "\n";
}

}  // namespace psid
