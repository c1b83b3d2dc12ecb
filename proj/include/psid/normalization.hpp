#pragma once

namespace psid {

// Affine per-channel map: normalized = (raw - center) / scale.
struct ChannelNorm {
  double center = 0.0;
  double scale = 1.0;
};

struct NormRecord {
  ChannelNorm t;       // time, mapped onto [-1, 1] over the sampled window
  ChannelNorm pm;      // mechanical power input (identity by default)
  ChannelNorm delta;   // rotor angle channel
  ChannelNorm domega;  // frequency deviation channel
};

}  // namespace psid
