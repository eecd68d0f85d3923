#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace rsrl {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Seeded random stream with platform-independent sampling helpers.
// Distributions are implemented on top of the raw engine output so that
// two runs with the same seed produce the same draws on any toolchain
// (std::uniform_real_distribution et al. are implementation-defined).
//
// child(a, b) derives an independent stream from the original seed, not
// from the current engine state, so derivation does not depend on how many
// draws were taken from the parent.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), engine_(splitmix64(seed)) {}

  std::uint64_t next_u64() { return engine_(); }

  // [0, 1)
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // unbiased draw from {0, 1, ..., n-1}
  int uniform_int(int n) {
    const std::uint64_t un = static_cast<std::uint64_t>(n);
    const std::uint64_t threshold = (-un) % un;
    for (;;) {
      const std::uint64_t x = next_u64();
      if (x >= threshold) return static_cast<int>(x % un);
    }
  }

  bool bernoulli(double p) { return uniform() < p; }

  // standard normal via Box-Muller; two uniforms per draw, no cached state
  double normal() {
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
  }

  Rng child(std::uint64_t a, std::uint64_t b = 0) const {
    return Rng(splitmix64(splitmix64(seed_ ^ (a * 0xd1342543de82ef95ULL)) ^
                          (b * 0xaf251af3b0f025b5ULL)));
  }

  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace rsrl
