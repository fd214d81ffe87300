#pragma once

#include <cstdint>
#include <random>

namespace scusum {

// SplitMix64 finalizer (Steele, Lea & Flood 2014). Used to derive independent
// stream seeds from a master seed and a stream index.
std::uint64_t splitmix64(std::uint64_t x) noexcept;

// Seed of stream `index` under `master`. Pure function of both arguments, so a
// replication's randomness does not depend on scheduling.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept;

/// Reproducible 64-bit generator.
///
/// Uniform bits come from std::mt19937_64, whose output sequence is fixed by
/// the C++ standard. Normal deviates use the Box-Muller transform on 53-bit
/// uniforms: u1 = (k1 + 1) / 2^53 in (0, 1], u2 = k2 / 2^53 in [0, 1), where
/// k = next() >> 11. Each pair of uniforms yields r cos(2 pi u2) followed by
/// r sin(2 pi u2), r = sqrt(-2 ln u1).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  double uniform();  // [0, 1)
  double normal();   // N(0, 1)
  double normal(double mean, double sd) { return mean + sd * normal(); }

 private:
  std::mt19937_64 engine_;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace scusum
