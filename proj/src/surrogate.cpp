#include "psid/surrogate.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>

#include "psid/common.hpp"

namespace psid {

MlpParams MlpParams::zeros(int hidden) {
  MlpParams p;
  p.hidden = hidden;
  p.w.assign(static_cast<std::size_t>(mlp_param_count(hidden)), 0.0);
  return p;
}

MlpParams init_params(Rng& rng, InitScheme scheme, int hidden) {
  MlpParams p = MlpParams::zeros(hidden);
  const int n = mlp_param_count(hidden);
  if (scheme == InitScheme::kPriorSample) {
    for (int i = 0; i < n; ++i) p.w[static_cast<std::size_t>(i)] = rng.normal(0.0, 1.0);
  } else {
    // U(-0.5, 0.5) / sqrt(fan_in); fan_in is 2 for the input layer, H for the head
    const double s_in = 1.0 / std::sqrt(2.0);
    const double s_out = 1.0 / std::sqrt(static_cast<double>(hidden));
    for (int i = 0; i < 3 * hidden; ++i)
      p.w[static_cast<std::size_t>(i)] = rng.uniform(-0.5, 0.5) * s_in;
    for (int i = 3 * hidden; i < n; ++i)
      p.w[static_cast<std::size_t>(i)] = rng.uniform(-0.5, 0.5) * s_out;
  }
  return p;
}

std::array<double, 2> surrogate_forward_norm(const MlpParams& p, double t_norm, double pm_norm) {
  for (double v : p.w) check_finite(v, "surrogate parameter");
  return mlp_forward(std::span<const double>(p.w), p.hidden, t_norm, pm_norm);
}

std::array<double, 2> surrogate_forward(const MlpParams& p, const NormRecord& norm, double t,
                                        double pm) {
  auto out = surrogate_eval(std::span<const double>(p.w), p.hidden, norm, t, pm);
  return {out[0], out[1]};
}

std::array<double, 2> surrogate_time_derivative(const MlpParams& p, const NormRecord& norm,
                                                double t, double pm) {
  ad::Dual<double> td{t, 1.0};
  auto out = surrogate_eval(std::span<const double>(p.w), p.hidden, norm, td, pm);
  return {out[0].b, out[1].b};
}

namespace {
nlohmann::json norm_to_json(const NormRecord& n) {
  auto ch = [](const ChannelNorm& c) { return nlohmann::json{{"center", c.center}, {"scale", c.scale}}; };
  return {{"t", ch(n.t)}, {"pm", ch(n.pm)}, {"delta", ch(n.delta)}, {"domega", ch(n.domega)}};
}
NormRecord norm_from_json(const nlohmann::json& j) {
  auto ch = [](const nlohmann::json& c) { return ChannelNorm{c.at("center"), c.at("scale")}; };
  return {ch(j.at("t")), ch(j.at("pm")), ch(j.at("delta")), ch(j.at("domega"))};
}
}  // namespace

void save_mlp_checkpoint(const std::string& path, const MlpParams& p, const NormRecord& norm) {
  nlohmann::json j;
  j["hidden"] = p.hidden;
  j["activation"] = "tanh";  // fixed architecture choice, recorded for the reader
  j["params"] = p.w;
  j["norm"] = norm_to_json(norm);
  std::ofstream f(path);
  require(f.good(), "save_mlp_checkpoint: cannot open " + path);
  f << j.dump(2) << "\n";
}

std::pair<MlpParams, NormRecord> load_mlp_checkpoint(const std::string& path) {
  std::ifstream f(path);
  require(f.good(), "load_mlp_checkpoint: cannot open " + path);
  nlohmann::json j;
  f >> j;
  MlpParams p;
  p.hidden = j.at("hidden");
  p.w = j.at("params").get<std::vector<double>>();
  require(static_cast<int>(p.w.size()) == mlp_param_count(p.hidden),
          "load_mlp_checkpoint: parameter count does not match hidden width");
  return {p, norm_from_json(j.at("norm"))};
}

}  // namespace psid
