#include "psid/simulate.hpp"

#include <Eigen/QR>

#include "psid/common.hpp"

namespace psid {

namespace {
constexpr double kNewtonTol = 1e-10;
constexpr int kNewtonMaxIter = 200;
}  // namespace

Simulator::Simulator(const SystemModel& model) : model_(model) {
  // device bus order: generators, inverters, then slack (if present)
  std::vector<int> keep;
  for (const auto& g : model_.gens) keep.push_back(g.bus);
  for (const auto& v : model_.invs) keep.push_back(v.bus);
  if (model_.has_slack) keep.push_back(model_.slack_bus);
  kron_ = kron_reduce(model_.net, keep);

  const Eigen::Index ng = model_.n_gen();
  ni_ = model_.n_inv();
  nv_ = ng + (model_.has_slack ? 1 : 0);

  // voltage-type rows: gens then slack; current-type rows: inverters
  std::vector<Eigen::Index> vrows, irows;
  for (Eigen::Index k = 0; k < ng; ++k) vrows.push_back(k);
  for (Eigen::Index j = 0; j < ni_; ++j) irows.push_back(ng + j);
  if (model_.has_slack) vrows.push_back(ng + ni_);

  auto block = [&](const std::vector<Eigen::Index>& rows, const std::vector<Eigen::Index>& cols) {
    CMatrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
      for (std::size_t j = 0; j < cols.size(); ++j)
        m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
            kron_.y_red(rows[i], cols[j]);
    return m;
  };
  y_vv_ = block(vrows, vrows);
  y_vi_ = block(vrows, irows);
  y_iv_ = block(irows, vrows);
  y_ii_ = block(irows, irows);
  if (ni_ > 0) {
    y_ii_lu_.compute(y_ii_);
    CMatrix probe = y_ii_lu_.solve(CMatrix::Identity(ni_, ni_));
    if (!probe.allFinite()) throw NumericalError("network solve singular at inverter buses");
  }
}

Simulator::NetworkSolution Simulator::solve_network(const Vector& x) const {
  const int ng = model_.n_gen();
  const Complex jc(0.0, 1.0);
  CVector v_v(nv_);
  for (int k = 0; k < ng; ++k) v_v(k) = std::exp(jc * x[gen_offset(k)]);
  if (model_.has_slack) v_v(nv_ - 1) = model_.slack_vmag * std::exp(jc * model_.slack_angle);

  CVector i_inj(ni_);
  for (Eigen::Index j = 0; j < ni_; ++j) {
    const int off = inv_offset(static_cast<int>(j));
    i_inj(j) = Complex(x[off + 6], x[off + 7]);  // grid-side filter current
  }

  CVector v_i(ni_);
  if (ni_ > 0) {
    v_i = y_ii_lu_.solve(i_inj - y_iv_ * v_v);
    if (!v_i.allFinite()) throw NumericalError("network solve singular");
  }

  NetworkSolution sol;
  sol.v_device.resize(nv_ + ni_);
  sol.i_device.resize(nv_ + ni_);
  const int ngs = ng;  // gens occupy [0, ng), inverters [ng, ng+ni), slack last
  for (int k = 0; k < ngs; ++k) sol.v_device(k) = v_v(k);
  for (Eigen::Index j = 0; j < ni_; ++j) sol.v_device(ngs + j) = v_i(j);
  if (model_.has_slack) sol.v_device(ngs + ni_) = v_v(nv_ - 1);

  const CVector i_v = y_vv_ * v_v + (ni_ > 0 ? CVector(y_vi_ * v_i) : CVector::Zero(nv_));
  for (int k = 0; k < ngs; ++k) sol.i_device(k) = i_v(k);
  for (Eigen::Index j = 0; j < ni_; ++j) sol.i_device(ngs + j) = i_inj(j);
  if (model_.has_slack) sol.i_device(ngs + ni_) = i_v(nv_ - 1);

  sol.v_interior = kron_.recon * sol.v_device;
  return sol;
}

Vector Simulator::derivative(const Vector& x, double pm_g1) const {
  const int ng = model_.n_gen();
  const Complex jc(0.0, 1.0);
  NetworkSolution sol = solve_network(x);

  Vector dx(state_size());
  for (int k = 0; k < ng; ++k) {
    const SyncGenParams& g = model_.gens[k];
    const int off = gen_offset(k);
    const double domega = x[off + 1];
    const double pgov = x[off + 2];
    const double pe = (sol.v_device(k) * std::conj(sol.i_device(k))).real();
    const double pm = (k == 0) ? pm_g1 : g.pm0;
    dx[off + 0] = domega;
    dx[off + 1] = (pm + (g.governor ? pgov : 0.0) - g.d * domega - pe) / g.m;
    dx[off + 2] = g.governor ? -(domega + pgov) / g.t_gov : 0.0;
  }

  for (Eigen::Index j = 0; j < ni_; ++j) {
    const SynchronverterParams& v = model_.invs[static_cast<std::size_t>(j)];
    const int off = inv_offset(static_cast<int>(j));
    const double dwc = x[off + 0];
    const double deltac = x[off + 1];
    const Complex i_rl(x[off + 2], x[off + 3]);
    const Complex v_f(x[off + 4], x[off + 5]);
    const Complex i_g(x[off + 6], x[off + 7]);
    const Complex v_t = sol.v_device(ng + j);

    const double omega_c = v.omega_ref + dwc;
    const Complex emf = v.mf_if * omega_c * std::exp(jc * deltac);
    const double t_e = v.mf_if * (std::exp(jc * deltac) * std::conj(i_rl)).real();
    const double t_m = v.p_set / v.omega_ref;
    // frequency feedback is suppressed inside the deadband
    const double damping = (std::abs(dwc) >= v.deadband) ? -v.d_c * dwc : 0.0;

    dx[off + 0] = (t_m - t_e + damping) / v.j_c;
    dx[off + 1] = dwc;
    const Complex di_rl = model_.omega_base * ((emf - v_f - v.r_f * i_rl) / v.l_f - jc * i_rl);
    const Complex dv_f = model_.omega_base * ((i_rl - i_g) / v.c_f - jc * v_f);
    const Complex di_g = model_.omega_base * ((v_f - v_t - v.r_t * i_g) / v.l_t - jc * i_g);
    dx[off + 2] = di_rl.real();
    dx[off + 3] = di_rl.imag();
    dx[off + 4] = dv_f.real();
    dx[off + 5] = dv_f.imag();
    dx[off + 6] = di_g.real();
    dx[off + 7] = di_g.imag();
  }
  return dx;
}

SteadyStateResult Simulator::steady_state() const {
  const int n = state_size();
  const bool solve_pm = !model_.has_slack;  // G1 balances the system, gauge delta_G1 = 0

  // unknown vector u: the full state; without a slack bus the delta_G1 slot
  // holds G1's mechanical power instead (its angle is the gauge reference)
  auto decode = [&](const Vector& u, Vector& x, double& pm) {
    x = u;
    if (solve_pm) {
      pm = u[0];
      x[0] = 0.0;
    } else {
      pm = model_.gens[0].pm0;
    }
  };
  auto residual = [&](const Vector& u) {
    Vector x;
    double pm;
    decode(u, x, pm);
    return derivative(x, pm);
  };

  Vector u = Vector::Zero(n);
  for (Eigen::Index j = 0; j < ni_; ++j) u[inv_offset(static_cast<int>(j)) + 4] = 1.0;  // V_f ~ 1
  if (solve_pm) u[0] = 0.0;

  Vector r = residual(u);
  double rnorm = r.lpNorm<Eigen::Infinity>();
  for (int iter = 0; iter < kNewtonMaxIter; ++iter) {
    if (rnorm < kNewtonTol) {
      Vector x;
      double pm;
      decode(u, x, pm);
      return {x, pm};
    }
    Matrix jac(n, n);
    for (int c = 0; c < n; ++c) {
      const double h = 1e-7 * std::max(1.0, std::abs(u[c]));
      Vector up = u, um = u;
      up[c] += h;
      um[c] -= h;
      jac.col(c) = (residual(up) - residual(um)) / (2.0 * h);
    }
    Vector step = jac.colPivHouseholderQr().solve(-r);
    if (!step.allFinite()) throw NumericalError("steady_state: singular Newton system");
    double lambda = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 40; ++ls) {
      Vector ut = u + lambda * step;
      Vector rt = residual(ut);
      const double rtn = rt.lpNorm<Eigen::Infinity>();
      if (rtn < rnorm || rtn < kNewtonTol) {
        u = ut;
        r = rt;
        rnorm = rtn;
        accepted = true;
        break;
      }
      lambda *= 0.5;
    }
    if (!accepted) break;
  }
  if (rnorm < kNewtonTol) {
    Vector x;
    double pm;
    decode(u, x, pm);
    return {x, pm};
  }
  throw NumericalError("steady_state: Newton failed to converge, residual norm " +
                       std::to_string(rnorm));
}

Trajectory Simulator::run(const SteadyStateResult& init, double dpm, double horizon,
                          double dt) const {
  require(horizon > 0.0, "simulate: horizon must be positive");
  const Vector r0 = derivative(init.x, init.pm0);
  if (r0.lpNorm<Eigen::Infinity>() > 1e-8) {
    throw NumericalError("simulate: initial state is not an equilibrium (|xdot| = " +
                         std::to_string(r0.lpNorm<Eigen::Infinity>()) + ")");
  }
  const double pm_post = init.pm0 + dpm;
  auto deriv = [&](double, const Vector& x) { return derivative(x, pm_post); };
  auto points = rk4_integrate(deriv, init.x, 0.0, horizon, dt);

  const int ng = model_.n_gen();
  Trajectory traj;
  traj.x0 = init.x;
  traj.pm0 = init.pm0;
  const auto ns = static_cast<Eigen::Index>(points.size());
  traj.times.resize(points.size());
  traj.delta.resize(ns, ng);
  traj.domega.resize(ns, ng);
  traj.pm.assign(points.size(), pm_post);
  for (Eigen::Index i = 0; i < ns; ++i) {
    traj.times[static_cast<std::size_t>(i)] = points[static_cast<std::size_t>(i)].t;
    for (int k = 0; k < ng; ++k) {
      traj.delta(i, k) = points[static_cast<std::size_t>(i)].x[gen_offset(k)];
      traj.domega(i, k) = points[static_cast<std::size_t>(i)].x[gen_offset(k) + 1];
    }
  }
  return traj;
}

SteadyStateResult steady_state(const SystemModel& model) { return Simulator(model).steady_state(); }

Trajectory simulate(const SystemModel& model, const SteadyStateResult& init, double dpm,
                    double horizon, double dt) {
  return Simulator(model).run(init, dpm, horizon, dt);
}

}  // namespace psid
