#pragma once

// Portable random streams. std::mt19937_64 is bit-specified by the
// standard; the uniform and normal transforms below are written out so
// draws do not depend on the standard library's distribution classes.

#include <cstdint>
#include <random>

namespace spectrum::rng {

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Version tag of the sub-seed scheme. Bump when `sub_seed` changes.
inline constexpr int kSubSeedVersion = 1;

/// Seed for stream `index` under master `seed` (scheme v1):
///   mix64(mix64(seed) ^ mix64(index + 1))
constexpr std::uint64_t sub_seed(std::uint64_t seed, std::uint64_t index) noexcept {
  return mix64(mix64(seed) ^ mix64(index + 1));
}

class Stream {
 public:
  explicit Stream(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Standard normal via Box-Muller; caches the second variate.
  double normal();

  /// Uniform integer in [0, n). n must be > 0.
  std::uint64_t below(std::uint64_t n);

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace spectrum::rng
