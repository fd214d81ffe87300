#include "scusum/rng.hpp"

#include <cmath>
#include <numbers>

namespace scusum {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept {
  return splitmix64(splitmix64(master) ^ (index * 0xD1B54A32D192ED03ULL + 1));
}

double Rng::uniform() {
  constexpr double kScale = 0x1.0p-53;
  return static_cast<double>(next() >> 11) * kScale;
}

double Rng::normal() {
  if (has_cached_) {
    has_cached_ = false;
    return cached_;
  }
  constexpr double kScale = 0x1.0p-53;
  const double u1 = static_cast<double>((next() >> 11) + 1) * kScale;
  const double u2 = static_cast<double>(next() >> 11) * kScale;
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  cached_ = r * std::sin(theta);
  has_cached_ = true;
  return r * std::cos(theta);
}

}  // namespace scusum
