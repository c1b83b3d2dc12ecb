#pragma once

#include <cstdint>
#include <random>

namespace psid {

// Seeded generator with derivable sub-streams. Identical seed gives an
// identical stream; substream(tag) yields an independent generator so that
// e.g. each particle or scenario can draw without coupling to the others.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), gen_(mix(seed)) {}

  std::uint64_t seed() const { return seed_; }

  Rng substream(std::uint64_t tag) const { return Rng(mix(seed_ ^ mix(tag + 0x9e3779b97f4a7c15ull))); }

  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(gen_);
  }
  double normal(double mean, double stddev) {
    return std::normal_distribution<double>(mean, stddev)(gen_);
  }
  // shape/rate parameterization
  double gamma(double shape, double rate) {
    return std::gamma_distribution<double>(shape, 1.0 / rate)(gen_);
  }
  double cauchy(double loc, double scale) {
    return std::cauchy_distribution<double>(loc, scale)(gen_);
  }
  // location-scale Student-t with dof degrees of freedom
  double student_t(double dof, double loc, double scale) {
    double z = normal(0.0, 1.0);
    double g = gamma(dof / 2.0, dof / 2.0);
    return loc + scale * z / std::sqrt(g);
  }
  std::uint64_t next_u64() { return gen_(); }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    // splitmix64 finalizer
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  std::uint64_t seed_;
  std::mt19937_64 gen_;
};

}  // namespace psid
