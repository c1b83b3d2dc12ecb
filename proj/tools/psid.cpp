#include <charconv>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "psid/common.hpp"
#include "psid/grid.hpp"
#include "psid/harness.hpp"
#include "psid/simulate.hpp"

namespace {

std::string fmt(double v) {
  char buf[40];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, p);
}

void add_scenario_flags(CLI::App* cmd, psid::ExperimentConfig& cfg) {
  cmd->add_option("--grid", cfg.grid, "grid id: smib, bus3, cigre14, ieee118");
  cmd->add_option("--dynamics", cfg.dynamics, "dynamics setting: fast, medium, slow");
  cmd->add_option("--seed", cfg.seed, "RNG seed")->required();
  cmd->add_option("--n-z", cfg.n_z, "number of samples");
  cmd->add_option("--noise", cfg.noise_sigma, "measurement noise std");
  cmd->add_flag("--step-is-delta", cfg.step_is_delta,
                "interpret the grid file's step_pm as a change, not a target");
}

void add_fit_flags(CLI::App* cmd, psid::ExperimentConfig& cfg) {
  cmd->add_option("--n-c", cfg.n_c, "collocation points");
  cmd->add_option("--iters", cfg.iterations, "training iterations");
  cmd->add_option("--particles", cfg.particles, "SVGD particle count");
  cmd->add_option("--hidden", cfg.hidden, "hidden layer width");
  cmd->add_option("--step", cfg.step, "optimizer base step");
  cmd->add_option("--mu-prior", cfg.prior.mu_prior, "lambda prior location");
  cmd->add_option("--kappa-prior", cfg.prior.kappa_prior, "lambda prior scale factor");
  cmd->add_option("--mape-floor", cfg.mape_floor, "MAPE denominator floor");
}

int run(int argc, char** argv) {
  CLI::App app{"power system identification toolkit"};
  app.require_subcommand(1);

  psid::ExperimentConfig cfg;
  std::string out = "out";
  std::string dataset_path, method_str = "bpinn", checkpoint;

  auto* c_sim = app.add_subcommand("simulate", "simulate a step response and write the dataset");
  add_scenario_flags(c_sim, cfg);
  c_sim->add_option("--out", out, "output base path (writes .csv and .meta.json)");

  auto* c_fit = app.add_subcommand("fit", "fit one method on a stored dataset");
  c_fit->add_option("--dataset", dataset_path, "dataset base path")->required();
  c_fit->add_option("--method", method_str, "bpinn, pinn or sindy");
  c_fit->add_option("--seed", cfg.seed, "RNG seed")->required();
  c_fit->add_option("--transfer-source", checkpoint, "posterior checkpoint to warm start from");
  add_fit_flags(c_fit, cfg);
  c_fit->add_option("--out", out, "output prefix");

  std::vector<std::string> grids{"smib", "bus3", "cigre14", "ieee118"};
  std::vector<std::string> dyns{"fast", "medium", "slow"};
  std::vector<std::string> methods{"bpinn", "pinn", "sindy"};
  std::vector<std::uint64_t> seeds{1};
  auto* c_cmp = app.add_subcommand("compare", "full method comparison campaign");
  add_scenario_flags(c_cmp, cfg);
  add_fit_flags(c_cmp, cfg);
  c_cmp->add_option("--grids", grids, "grid ids");
  c_cmp->add_option("--dynamics-set", dyns, "dynamics settings");
  c_cmp->add_option("--methods", methods, "methods to compare");
  c_cmp->add_option("--seeds", seeds, "seeds (one campaign repetition each)");
  c_cmp->add_option("--out", out, "output prefix");

  std::vector<double> mu_grid{1.0}, kappa_grid{25.0};
  auto* c_prior = app.add_subcommand("prior-sweep", "MAPE sensitivity to the lambda prior");
  add_scenario_flags(c_prior, cfg);
  add_fit_flags(c_prior, cfg);
  c_prior->add_option("--mu-grid", mu_grid, "prior locations");
  c_prior->add_option("--kappa-grid", kappa_grid, "prior scale factors");
  c_prior->add_option("--out", out, "output prefix");

  std::vector<int> nz_grid{100}, nc_mult{0};
  auto* c_samp = app.add_subcommand("sample-sweep", "sample/collocation sweep");
  add_scenario_flags(c_samp, cfg);
  add_fit_flags(c_samp, cfg);
  c_samp->add_option("--n-z-grid", nz_grid, "sample counts");
  c_samp->add_option("--n-c-mult", nc_mult, "collocation multipliers of N_z");
  c_samp->add_option("--out", out, "output prefix");

  std::string src_grid = "smib", src_dynamics = "slow";
  int pretrain_iters = 1000;
  std::vector<int> iter_grid{100, 200, 500, 1000, 1500, 2000};
  auto* c_tr = app.add_subcommand("transfer", "warm-start transfer study");
  add_scenario_flags(c_tr, cfg);
  add_fit_flags(c_tr, cfg);
  c_tr->add_option("--source-grid", src_grid, "pretraining grid");
  c_tr->add_option("--source-dynamics", src_dynamics, "pretraining dynamics");
  c_tr->add_option("--pretrain-iters", pretrain_iters, "pretraining iterations");
  c_tr->add_option("--iter-grid", iter_grid, "iteration checkpoints for the curves");
  c_tr->add_option("--out", out, "output prefix");

  std::array<double, 3> lam{1.0, 1.0, 1.0};
  auto* c_rec = app.add_subcommand("reconstruct", "integrate the swing model under lambda");
  c_rec->add_option("--dataset", dataset_path, "dataset base path")->required();
  c_rec->add_option("--m", lam[0], "inertia")->required();
  c_rec->add_option("--d", lam[1], "damping")->required();
  c_rec->add_option("--b", lam[2], "synchronizing coefficient")->required();
  c_rec->add_option("--out", out, "output csv path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (c_sim->parsed()) {
    psid::Dataset ds = psid::make_dataset(cfg);
    psid::save_dataset(out, ds);
    std::cout << "wrote " << out << ".csv (" << ds.n() << " samples)\n";
    return 0;
  }

  if (c_fit->parsed()) {
    cfg.method = psid::parse_method(method_str);
    if (!checkpoint.empty()) cfg.transfer_source = checkpoint;
    psid::Dataset ds = psid::load_dataset(dataset_path);
    psid::Posterior post;
    psid::ResultRecord rec = psid::run_cell(cfg, ds, &post);
    if (!rec.ok()) throw psid::NumericalError("fit failed: " + rec.error);
    psid::write_results_csv(out + "_results.csv", {rec});
    psid::write_manifest(out + "_manifest.json", {rec});
    if (cfg.method == psid::Method::kBpinn) psid::save_posterior(out + "_posterior.json", post);
    std::cout << "lambda = (" << fmt(rec.lambda[0]) << ", " << fmt(rec.lambda[1]) << ", "
              << fmt(rec.lambda[2]) << "), MAPE_delta = " << fmt(rec.mape_delta)
              << "%, MAPE_domega = " << fmt(rec.mape_domega) << "%\n";
    return 0;
  }

  if (c_cmp->parsed()) {
    std::vector<psid::Method> ms;
    for (const auto& s : methods) ms.push_back(psid::parse_method(s));
    auto records = psid::run_comparison(grids, dyns, ms, seeds, cfg);
    psid::write_results_csv(out + "_results.csv", records);
    psid::write_manifest(out + "_manifest.json", records);
    std::cout << "wrote " << records.size() << " records to " << out << "_results.csv\n";
    return 0;
  }

  if (c_prior->parsed()) {
    auto records = psid::run_prior_sweep(mu_grid, kappa_grid, cfg);
    psid::write_results_csv(out + "_results.csv", records);
    psid::write_manifest(out + "_manifest.json", records);
    std::cout << "wrote " << records.size() << " records to " << out << "_results.csv\n";
    return 0;
  }

  if (c_samp->parsed()) {
    auto records = psid::run_sample_sweep(nz_grid, nc_mult, cfg);
    psid::write_results_csv(out + "_results.csv", records);
    psid::write_manifest(out + "_manifest.json", records);
    std::cout << "wrote " << records.size() << " records to " << out << "_results.csv\n";
    return 0;
  }

  if (c_tr->parsed()) {
    psid::ExperimentConfig src = cfg;
    src.grid = src_grid;
    src.dynamics = src_dynamics;
    auto res = psid::run_transfer(src, pretrain_iters, cfg, iter_grid);
    {
      std::ofstream f(out + "_curves.csv");
      psid::require(f.good(), "cannot open " + out + "_curves.csv");
      f << "iterations,scratch_mape,warm_mape\n";
      for (std::size_t i = 0; i < res.iteration_grid.size(); ++i)
        f << res.iteration_grid[i] << "," << fmt(res.scratch_mape[i]) << ","
          << fmt(res.warm_mape[i]) << "\n";
    }
    nlohmann::json j{{"scratch_iters_to_target", res.scratch_iters_to_target},
                     {"warm_iters_to_target", res.warm_iters_to_target}};
    std::ofstream f(out + "_manifest.json");
    psid::require(f.good(), "cannot open " + out + "_manifest.json");
    f << j.dump(2) << "\n";
    std::cout << "iterations to target: scratch " << res.scratch_iters_to_target << ", warm "
              << res.warm_iters_to_target << "\n";
    return 0;
  }

  if (c_rec->parsed()) {
    psid::Dataset ds = psid::load_dataset(dataset_path);
    psid::Reconstruction rec = psid::reconstruct(lam, ds);
    std::ofstream f(out);
    psid::require(f.good(), "cannot open " + out);
    f << "t,delta,domega\n";
    for (std::size_t i = 0; i < rec.t.size(); ++i)
      f << fmt(rec.t[i]) << "," << fmt(rec.delta[i]) << "," << fmt(rec.domega[i]) << "\n";
    if (rec.rotating) std::cout << "note: |P_m| > B, no equilibrium (rotating solution)\n";
    std::cout << "wrote " << out << "\n";
    return 0;
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const psid::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const psid::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
