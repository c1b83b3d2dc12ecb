#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "psid/diff.hpp"
#include "psid/rng.hpp"

namespace psid {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

struct SyncGenParams {
  int bus = 0;
  double m = 0.4;      // inertia, p.u. s^2
  double d = 0.15;     // damping, p.u. s
  double t_gov = 2.0;  // governor time constant, s
  double pm0 = 0.0;    // pre-step mechanical power, p.u.
  bool governor = true;
};

struct SynchronverterParams {
  int bus = 0;
  double j_c = 0.02;  // virtual inertia
  double d_c = 0.1;   // virtual damping
  double r_f = 0.01, l_f = 0.05, c_f = 0.05;  // RLC filter, p.u.
  double r_t = 0.01, l_t = 0.05;              // transformer, p.u.
  double mf_if = 1.0;                         // field-flux product
  double omega_ref = 1.0;                     // p.u.
  double p_set = 0.0;                         // inertial response only
  double deadband = 2e-4;                     // p.u. frequency
};

struct Branch {
  int from = 0, to = 0;
  double susceptance = 0.0;  // p.u., > 0
};

struct Load {
  int bus = 0;
  double g = 0.0, b = 0.0;  // shunt admittance, p.u.
};

struct Network {
  int n_bus = 0;
  std::vector<Branch> branches;
  std::vector<Load> loads;

  // Bus admittance matrix with loads folded in as shunts.
  CMatrix admittance() const;
};

// Admittance network among `keep` buses after eliminating all others, plus
// the map reconstructing eliminated bus voltages from kept ones
// (V_elim = recon * V_keep when the eliminated buses carry no injection).
struct KronReduction {
  CMatrix y_red;
  CMatrix recon;
  std::vector<int> kept;      // original bus index per reduced index
  std::vector<int> eliminated;
};
KronReduction kron_reduce(const Network& net, const std::vector<int>& keep);

struct SystemModel {
  std::string grid;      // smib | bus3 | cigre14 | ieee118
  std::string dynamics;  // fast | medium | slow
  std::uint64_t seed = 0;

  Network net;
  std::vector<SyncGenParams> gens;  // gens[0] is G1, the perturbed machine
  std::vector<SynchronverterParams> invs;

  bool has_slack = false;
  int slack_bus = -1;
  double slack_vmag = 1.0;
  double slack_angle = 0.0;

  double step_pm = -0.1;     // post-step mechanical power of G1, p.u.
  double horizon = 5.0;      // default trajectory length, s
  double dt = 1e-3;          // integration step; grids with LCL filters need
                             // a finer step than the filter resonance period
  double omega_base = 100.0 * M_PI;  // electrical speed for the filter phasor ODEs

  int n_gen() const { return static_cast<int>(gens.size()); }
  int n_inv() const { return static_cast<int>(invs.size()); }
  // True parameters of the SMIB regression model; only exact for grid=="smib".
  std::optional<std::array<double, 3>> exact_lambda() const;
};

// Parses a grid description file (buses, branches, loads, devices).
SystemModel load_grid_file(const std::string& path);

// Loads `<data_dir>/<grid>_<dynamics>.grid` and applies the scenario's
// randomized inverter parameter jitter where the grid calls for it
// (cigre14: J_c, d_c independently uniform within +-20% of their defaults).
SystemModel build_scenario(const std::string& grid, const std::string& dynamics, Rng rng,
                           const std::string& data_dir = PSID_DATA_DIR);

}  // namespace psid
