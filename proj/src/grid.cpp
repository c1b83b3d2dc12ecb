#include "psid/grid.hpp"

#include <Eigen/LU>
#include <fstream>
#include <set>
#include <sstream>

#include "psid/common.hpp"

namespace psid {

CMatrix Network::admittance() const {
  CMatrix y = CMatrix::Zero(n_bus, n_bus);
  const Complex jc(0.0, 1.0);
  for (const Branch& br : branches) {
    const Complex yb = -jc * br.susceptance;  // lossless line, B = 1/X
    y(br.from, br.from) += yb;
    y(br.to, br.to) += yb;
    y(br.from, br.to) -= yb;
    y(br.to, br.from) -= yb;
  }
  for (const Load& ld : loads) y(ld.bus, ld.bus) += Complex(ld.g, ld.b);
  return y;
}

KronReduction kron_reduce(const Network& net, const std::vector<int>& keep) {
  require(!keep.empty(), "kron_reduce: keep set must be non-empty");
  std::set<int> keep_set(keep.begin(), keep.end());
  require(static_cast<int>(keep_set.size()) == static_cast<int>(keep.size()),
          "kron_reduce: duplicate bus in keep set");
  KronReduction kr;
  kr.kept = keep;
  for (int b = 0; b < net.n_bus; ++b)
    if (!keep_set.count(b)) kr.eliminated.push_back(b);

  const CMatrix y = net.admittance();
  const auto nd = static_cast<Eigen::Index>(keep.size());
  const auto ne = static_cast<Eigen::Index>(kr.eliminated.size());
  CMatrix ydd(nd, nd), ydn(nd, ne), ynd(ne, nd), ynn(ne, ne);
  for (Eigen::Index i = 0; i < nd; ++i)
    for (Eigen::Index j = 0; j < nd; ++j) ydd(i, j) = y(keep[i], keep[j]);
  for (Eigen::Index i = 0; i < nd; ++i)
    for (Eigen::Index j = 0; j < ne; ++j) ydn(i, j) = y(keep[i], kr.eliminated[j]);
  for (Eigen::Index i = 0; i < ne; ++i)
    for (Eigen::Index j = 0; j < nd; ++j) ynd(i, j) = y(kr.eliminated[i], keep[j]);
  for (Eigen::Index i = 0; i < ne; ++i)
    for (Eigen::Index j = 0; j < ne; ++j) ynn(i, j) = y(kr.eliminated[i], kr.eliminated[j]);

  if (ne == 0) {
    kr.y_red = ydd;
    kr.recon = CMatrix::Zero(0, nd);
    return kr;
  }
  Eigen::PartialPivLU<CMatrix> lu(ynn);
  const CMatrix x = lu.solve(ynd);  // Ynn^-1 Ynd
  if (!x.allFinite()) throw NumericalError("kron_reduce: interior admittance block is singular");
  kr.y_red = ydd - ydn * x;
  kr.recon = -x;
  return kr;
}

std::optional<std::array<double, 3>> SystemModel::exact_lambda() const {
  if (grid != "smib" || gens.size() != 1 || !invs.empty() || gens[0].governor) return std::nullopt;
  double b_total = 0.0;
  for (const Branch& br : net.branches) b_total += br.susceptance;
  return std::array<double, 3>{gens[0].m, gens[0].d, b_total};
}

SystemModel load_grid_file(const std::string& path) {
  std::ifstream f(path);
  require(f.good(), "cannot open grid file: " + path);
  SystemModel m;
  std::string line;
  int lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    std::istringstream ss(line);
    std::string kw;
    if (!(ss >> kw)) continue;
    auto fail = [&](const std::string& what) {
      throw ConfigError(path + ":" + std::to_string(lineno) + ": " + what);
    };
    if (kw == "grid") {
      ss >> m.grid >> m.dynamics;
    } else if (kw == "bus") {
      if (!(ss >> m.net.n_bus) || m.net.n_bus <= 0) fail("bad bus count");
    } else if (kw == "branch") {
      Branch br;
      if (!(ss >> br.from >> br.to >> br.susceptance)) fail("bad branch line");
      if (br.susceptance <= 0.0) fail("branch susceptance must be positive");
      m.net.branches.push_back(br);
    } else if (kw == "load") {
      Load ld;
      if (!(ss >> ld.bus >> ld.g >> ld.b)) fail("bad load line");
      m.net.loads.push_back(ld);
    } else if (kw == "slack") {
      if (!(ss >> m.slack_bus)) fail("bad slack line");
      ss >> m.slack_vmag >> m.slack_angle;
      m.has_slack = true;
    } else if (kw == "gen") {
      SyncGenParams g;
      int gov = 1;
      if (!(ss >> g.bus >> g.m >> g.d >> g.t_gov >> g.pm0 >> gov)) fail("bad gen line");
      g.governor = gov != 0;
      if (g.m <= 0.0 || g.d <= 0.0 || g.t_gov <= 0.0) fail("gen parameters must be positive");
      m.gens.push_back(g);
    } else if (kw == "inv") {
      SynchronverterParams v;
      if (!(ss >> v.bus >> v.j_c >> v.d_c >> v.r_f >> v.l_f >> v.c_f >> v.r_t >> v.l_t >>
            v.mf_if >> v.deadband))
        fail("bad inv line");
      if (v.j_c <= 0.0 || v.d_c <= 0.0 || v.l_f <= 0.0 || v.c_f <= 0.0 || v.l_t <= 0.0)
        fail("inverter parameters must be positive");
      m.invs.push_back(v);
    } else if (kw == "step_pm") {
      if (!(ss >> m.step_pm)) fail("bad step_pm line");
    } else if (kw == "horizon") {
      if (!(ss >> m.horizon)) fail("bad horizon line");
    } else if (kw == "dt") {
      if (!(ss >> m.dt) || m.dt <= 0.0) fail("bad dt line");
    } else {
      fail("unknown keyword '" + kw + "'");
    }
  }
  require(!m.gens.empty(), path + ": at least one synchronous generator is required");
  require(m.net.n_bus > 0, path + ": missing bus count");
  for (const Branch& br : m.net.branches)
    require(br.from >= 0 && br.from < m.net.n_bus && br.to >= 0 && br.to < m.net.n_bus,
            path + ": branch references unknown bus");
  // connectivity check over branches
  {
    std::vector<int> comp(static_cast<std::size_t>(m.net.n_bus), -1);
    std::vector<int> stack{0};
    comp[0] = 0;
    while (!stack.empty()) {
      int b = stack.back();
      stack.pop_back();
      for (const Branch& br : m.net.branches) {
        int o = -1;
        if (br.from == b) o = br.to;
        if (br.to == b) o = br.from;
        if (o >= 0 && comp[static_cast<std::size_t>(o)] < 0) {
          comp[static_cast<std::size_t>(o)] = 0;
          stack.push_back(o);
        }
      }
    }
    for (int b = 0; b < m.net.n_bus; ++b)
      require(comp[static_cast<std::size_t>(b)] == 0, path + ": network graph is not connected");
  }
  return m;
}

SystemModel build_scenario(const std::string& grid, const std::string& dynamics, Rng rng,
                           const std::string& data_dir) {
  require(grid == "smib" || grid == "bus3" || grid == "cigre14" || grid == "ieee118",
          "unknown grid label: " + grid);
  require(dynamics == "fast" || dynamics == "medium" || dynamics == "slow",
          "unknown dynamics label: " + dynamics);
  SystemModel m = load_grid_file(data_dir + "/" + grid + "_" + dynamics + ".grid");
  m.seed = rng.seed();
  if (grid == "cigre14") {
    // per-inverter +-20% uniform jitter on J_c and d_c around the file defaults
    for (std::size_t i = 0; i < m.invs.size(); ++i) {
      Rng sub = rng.substream(static_cast<std::uint64_t>(i));
      m.invs[i].j_c *= sub.uniform(0.8, 1.2);
      m.invs[i].d_c *= sub.uniform(0.8, 1.2);
    }
  }
  return m;
}

}  // namespace psid
