#include "psid/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "psid/common.hpp"

namespace psid {

namespace {

// shortest round-trip formatting, so identical runs give identical bytes
std::string fmt(double v) {
  char buf[40];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, p);
}

ChannelNorm minmax_norm(const std::vector<double>& v) {
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  const double c = 0.5 * (*lo + *hi);
  const double s = 0.5 * (*hi - *lo);
  if (s < 1e-12) return {c, 1.0};  // constant channel
  return {c, s};
}

}  // namespace

Dataset sample_dataset(const Trajectory& traj, const SystemModel& model, double rate, double T,
                       double noise_sigma, Rng rng, bool use_coi) {
  require(rate > 0.0, "sample_dataset: rate must be positive");
  require(rate * T >= 2.0, "sample_dataset: need at least 2 samples (rate*T >= 2)");
  require(traj.times.size() >= 2, "sample_dataset: trajectory too short");
  const double dt = traj.times[1] - traj.times[0];
  require(T <= traj.times.back() + 1e-9, "sample_dataset: T exceeds trajectory horizon");

  const double period = 1.0 / rate;
  const double ratio = period / dt;
  const auto stride = static_cast<std::size_t>(std::llround(ratio));
  require(std::abs(ratio - static_cast<double>(stride)) < 1e-9 && stride >= 1,
          "sample_dataset: sampling rate must be an integer multiple of the integration step");

  const auto n_z = static_cast<std::size_t>(std::llround(rate * T));
  require((n_z - 1) * stride < traj.times.size(), "sample_dataset: trajectory too short for T");

  const int ng = static_cast<int>(traj.delta.cols());
  double m_total = 0.0;
  for (const auto& g : model.gens) m_total += g.m;

  auto channel_at = [&](const Matrix& m, std::size_t row) {
    if (!use_coi) return m(static_cast<Eigen::Index>(row), 0);
    double acc = 0.0;
    for (int k = 0; k < ng; ++k)
      acc += model.gens[static_cast<std::size_t>(k)].m * m(static_cast<Eigen::Index>(row), k);
    return acc / m_total;
  };

  Dataset ds;
  ds.grid = model.grid;
  ds.dynamics = model.dynamics;
  ds.seed = rng.seed();
  ds.rate = rate;
  ds.horizon = T;
  ds.noise_sigma = noise_sigma;
  ds.coi = use_coi;
  ds.true_lambda = model.exact_lambda();

  // absolute angle is only meaningful against the SMIB's infinite bus
  ds.delta_offset = (model.grid == "smib") ? 0.0 : channel_at(traj.delta, 0);

  for (std::size_t k = 0; k < n_z; ++k) {
    const std::size_t row = k * stride;
    ds.t.push_back(traj.times[row]);
    ds.pm.push_back(traj.pm[row]);
    double de = channel_at(traj.delta, row) - ds.delta_offset;
    double dw = channel_at(traj.domega, row);
    ds.delta_true.push_back(de);
    ds.domega_true.push_back(dw);
    if (noise_sigma > 0.0) {
      de += rng.normal(0.0, noise_sigma);
      dw += rng.normal(0.0, noise_sigma);
    }
    ds.delta.push_back(de);
    ds.domega.push_back(dw);
  }

  ds.norm.t = {T / 2.0, T / 2.0};
  ds.norm.pm = {0.0, 1.0};
  ds.norm.delta = minmax_norm(ds.delta);
  ds.norm.domega = minmax_norm(ds.domega);
  return ds;
}

void save_dataset(const std::string& base, const Dataset& ds) {
  {
    std::ofstream f(base + ".csv");
    require(f.good(), "save_dataset: cannot open " + base + ".csv");
    f << "t,P_m,delta,domega,delta_true,domega_true\n";
    for (int i = 0; i < ds.n(); ++i) {
      const auto k = static_cast<std::size_t>(i);
      f << fmt(ds.t[k]) << "," << fmt(ds.pm[k]) << "," << fmt(ds.delta[k]) << ","
        << fmt(ds.domega[k]) << "," << fmt(ds.delta_true[k]) << "," << fmt(ds.domega_true[k])
        << "\n";
    }
  }
  nlohmann::json j;
  j["grid"] = ds.grid;
  j["dynamics"] = ds.dynamics;
  j["seed"] = ds.seed;
  j["rate"] = ds.rate;
  j["horizon"] = ds.horizon;
  j["noise_sigma"] = ds.noise_sigma;
  j["delta_offset"] = ds.delta_offset;
  j["coi"] = ds.coi;
  auto ch = [](const ChannelNorm& c) { return nlohmann::json{{"center", c.center}, {"scale", c.scale}}; };
  j["norm"] = {{"t", ch(ds.norm.t)}, {"pm", ch(ds.norm.pm)}, {"delta", ch(ds.norm.delta)},
               {"domega", ch(ds.norm.domega)}};
  if (ds.true_lambda) {
    j["true_lambda"] = {{"m", (*ds.true_lambda)[0]}, {"d", (*ds.true_lambda)[1]},
                        {"B", (*ds.true_lambda)[2]}};
  }
  std::ofstream f(base + ".meta.json");
  require(f.good(), "save_dataset: cannot open " + base + ".meta.json");
  f << j.dump(2) << "\n";
}

Dataset load_dataset(const std::string& base) {
  Dataset ds;
  {
    std::ifstream f(base + ".csv");
    require(f.good(), "load_dataset: cannot open " + base + ".csv");
    std::string line;
    require(static_cast<bool>(std::getline(f, line)), "load_dataset: empty csv");
    require(line == "t,P_m,delta,domega,delta_true,domega_true",
            "load_dataset: unexpected csv header");
    while (std::getline(f, line)) {
      if (line.empty()) continue;
      std::istringstream ss(line);
      std::string cell;
      double v[6];
      for (int c = 0; c < 6; ++c) {
        require(static_cast<bool>(std::getline(ss, cell, ',')), "load_dataset: short csv row");
        v[c] = std::stod(cell);
      }
      ds.t.push_back(v[0]);
      ds.pm.push_back(v[1]);
      ds.delta.push_back(v[2]);
      ds.domega.push_back(v[3]);
      ds.delta_true.push_back(v[4]);
      ds.domega_true.push_back(v[5]);
    }
  }
  std::ifstream f(base + ".meta.json");
  require(f.good(), "load_dataset: cannot open " + base + ".meta.json");
  nlohmann::json j;
  f >> j;
  ds.grid = j.at("grid");
  ds.dynamics = j.at("dynamics");
  ds.seed = j.at("seed");
  ds.rate = j.at("rate");
  ds.horizon = j.at("horizon");
  ds.noise_sigma = j.at("noise_sigma");
  ds.delta_offset = j.at("delta_offset");
  ds.coi = j.at("coi");
  auto ch = [](const nlohmann::json& c) { return ChannelNorm{c.at("center"), c.at("scale")}; };
  ds.norm = {ch(j.at("norm").at("t")), ch(j.at("norm").at("pm")), ch(j.at("norm").at("delta")),
             ch(j.at("norm").at("domega"))};
  if (j.contains("true_lambda")) {
    ds.true_lambda = std::array<double, 3>{j["true_lambda"].at("m"), j["true_lambda"].at("d"),
                                           j["true_lambda"].at("B")};
  }
  require(ds.n() >= 2, "load_dataset: dataset must hold at least 2 samples");
  return ds;
}

}  // namespace psid
