#pragma once

#include <Eigen/LU>

#include "psid/grid.hpp"
#include "psid/ode.hpp"

namespace psid {

struct Trajectory {
  std::vector<double> times;       // strictly increasing, starts at 0
  Matrix delta;                    // n_samples x n_gen, rad
  Matrix domega;                   // n_samples x n_gen, p.u.
  std::vector<double> pm;          // G1 mechanical power seen by the estimator
  Vector x0;                       // full pre-step equilibrium state
  double pm0 = 0.0;                // G1 pre-step mechanical power
};

struct SteadyStateResult {
  Vector x;
  double pm0 = 0.0;  // solved for G1 when the grid has no slack bus
};

// Quasi-stationary phasor coupling: generator and synchronverter EMFs drive an
// algebraic admittance solve over the Kron-reduced device buses each step.
class Simulator {
 public:
  explicit Simulator(const SystemModel& model);

  const SystemModel& model() const { return model_; }
  int state_size() const { return 3 * model_.n_gen() + 8 * model_.n_inv(); }

  static int gen_offset(int k) { return 3 * k; }
  int inv_offset(int j) const { return 3 * model_.n_gen() + 8 * j; }

  Vector derivative(const Vector& x, double pm_g1) const;

  // Bus voltages and device injections for one state (used by the power
  // balance checks; v_interior covers the Kron-eliminated buses).
  struct NetworkSolution {
    CVector v_device;
    CVector i_device;    // current injected into the network at device buses
    CVector v_interior;
  };
  NetworkSolution solve_network(const Vector& x) const;

  SteadyStateResult steady_state() const;

  Trajectory run(const SteadyStateResult& init, double dpm, double horizon, double dt) const;

 private:
  SystemModel model_;
  KronReduction kron_;
  Eigen::Index nv_ = 0, ni_ = 0;  // voltage-type and current-type device counts
  CMatrix y_vv_, y_vi_, y_iv_, y_ii_;
  Eigen::PartialPivLU<CMatrix> y_ii_lu_;
};

SteadyStateResult steady_state(const SystemModel& model);

// Applies the mechanical-power step dpm to G1 at t = 0 and integrates.
// `init` must come from steady_state (checked against the unperturbed model).
Trajectory simulate(const SystemModel& model, const SteadyStateResult& init, double dpm,
                    double horizon, double dt = 1e-3);

}  // namespace psid
