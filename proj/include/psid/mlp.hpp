#pragma once

#include <array>
#include <span>

#include "psid/dual.hpp"

namespace psid {

// Flat parameter layout of the 1-hidden-layer net (inputs t, P_m; outputs
// delta, domega): [W1 (H x 2, per-neuron t/pm weight pairs) | b1 (H) |
// W2 (2 x H, row-major) | b2 (2)].
constexpr int mlp_param_count(int hidden) { return 5 * hidden + 2; }

constexpr int mlp_w1_index(int hidden, int neuron, int input) { (void)hidden; return 2 * neuron + input; }
constexpr int mlp_b1_index(int hidden, int neuron) { return 2 * hidden + neuron; }
constexpr int mlp_w2_index(int hidden, int out, int neuron) { return 3 * hidden + out * hidden + neuron; }
constexpr int mlp_b2_index(int hidden, int out) { return 5 * hidden + out; }

// tanh hidden layer, linear output head. Generic over the parameter scalar PS
// (double or tape Var) and the time-input scalar TS (double or a forward-mode
// dual), so one evaluation rule serves prediction, parameter gradients, and
// exact time derivatives.
template <class PS, class TS, class PMS>
auto mlp_forward(std::span<const PS> p, int hidden, const TS& t, const PMS& pm) {
  using std::tanh;
  using R = decltype(p[0] * t + p[0] * pm + p[0]);
  std::array<R, 2> out{};
  for (int k = 0; k < 2; ++k) out[k] = R{};
  for (int j = 0; j < hidden; ++j) {
    auto pre = p[mlp_w1_index(hidden, j, 0)] * t + p[mlp_w1_index(hidden, j, 1)] * pm +
               p[mlp_b1_index(hidden, j)];
    auto h = tanh(pre);
    if (j == 0) {
      out[0] = p[mlp_w2_index(hidden, 0, 0)] * h;
      out[1] = p[mlp_w2_index(hidden, 1, 0)] * h;
    } else {
      out[0] = out[0] + p[mlp_w2_index(hidden, 0, j)] * h;
      out[1] = out[1] + p[mlp_w2_index(hidden, 1, j)] * h;
    }
  }
  out[0] = out[0] + p[mlp_b2_index(hidden, 0)];
  out[1] = out[1] + p[mlp_b2_index(hidden, 1)];
  return out;
}

}  // namespace psid
