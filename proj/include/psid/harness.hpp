#pragma once

#include <optional>
#include <string>
#include <vector>

#include "psid/bpinn.hpp"
#include "psid/dataset.hpp"
#include "psid/pinn.hpp"
#include "psid/sindy.hpp"

namespace psid {

enum class Method { kBpinn, kPinn, kSindy };

std::string method_name(Method m);
Method parse_method(const std::string& s);

struct ExperimentConfig {
  std::string grid = "smib";
  std::string dynamics = "fast";
  std::uint64_t seed = 0;
  Method method = Method::kBpinn;
  int n_z = 100;
  int n_c = 0;
  int iterations = 2000;
  int particles = 30;
  int hidden = 20;
  double step = 5e-2;
  double noise_sigma = 0.0;
  double mape_floor = 0.01;  // fraction of the reference channel peak
  bool step_is_delta = false;  // read the grid file's step_pm as a delta
  PriorConfig prior;
  std::optional<std::string> transfer_source;  // posterior checkpoint path
  std::string outdir = ".";
};

struct ResultRecord {
  ExperimentConfig config;
  std::array<double, 3> lambda{};     // m, d, B
  std::array<double, 3> two_sigma{};  // zero for point estimators
  double mape_delta = 0.0;
  double mape_domega = 0.0;
  int iterations_used = 0;
  bool rotating = false;
  double wall_time_s = 0.0;  // manifest only, kept out of the CSV
  std::string error;         // nonempty when the cell failed

  bool ok() const { return error.empty(); }
};

struct Reconstruction {
  std::vector<double> t, delta, domega;
  bool rotating = false;  // |P_m| > B: no equilibrium, angle keeps advancing
};

// Integrates the aggregate swing model under lambda from the dataset's first
// sample and mechanical power, evaluated at the dataset's instants.
Reconstruction reconstruct(const std::array<double, 3>& lambda, const Dataset& ds);

// Mean absolute percentage error with the denominator floored at `floor`
// (inputs are expected in normalized units).
double mape(const std::vector<double>& x, const std::vector<double>& xhat, double floor = 1e-3);

// Builds the scenario, simulates the step response and samples the dataset
// for one config. Shared by every campaign and the CLI.
Dataset make_dataset(const ExperimentConfig& cfg);

// Fits one method on a dataset and scores the reconstruction. The returned
// record carries the posterior summary when the method is Bayesian.
ResultRecord run_cell(const ExperimentConfig& cfg, const Dataset& ds,
                      Posterior* posterior_out = nullptr);

// Campaigns. Failures are captured per record; a bad cell never aborts a run.
std::vector<ResultRecord> run_comparison(const std::vector<std::string>& grids,
                                         const std::vector<std::string>& dynamics,
                                         const std::vector<Method>& methods,
                                         const std::vector<std::uint64_t>& seeds,
                                         const ExperimentConfig& base);

std::vector<ResultRecord> run_prior_sweep(const std::vector<double>& mu_grid,
                                          const std::vector<double>& kappa_grid,
                                          const ExperimentConfig& base);

std::vector<ResultRecord> run_sample_sweep(const std::vector<int>& n_z_grid,
                                           const std::vector<int>& n_c_multipliers,
                                           const ExperimentConfig& base);

struct TransferResult {
  std::vector<int> iteration_grid;
  std::vector<double> scratch_mape, warm_mape;  // mean of the two channel MAPEs
  int scratch_iters_to_target = -1;  // first grid point within 10% of scratch final
  int warm_iters_to_target = -1;
};

TransferResult run_transfer(const ExperimentConfig& source, int pretrain_iters,
                            const ExperimentConfig& target,
                            const std::vector<int>& iteration_grid);

// One CSV per campaign (no wall times, so identical seeds give identical
// bytes) plus a JSON manifest with the config echoes and timings.
void write_results_csv(const std::string& path, const std::vector<ResultRecord>& records);
void write_manifest(const std::string& path, const std::vector<ResultRecord>& records);

}  // namespace psid
