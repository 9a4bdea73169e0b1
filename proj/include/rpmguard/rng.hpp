#pragma once

#include <cstdint>
#include <random>

namespace rpmguard {

// Seeded RNG with fully specified output mapping. mt19937_64 has a fixed
// bitstream; the double/normal mappings below avoid the
// implementation-defined std::*_distribution algorithms so that identical
// seeds give identical artifacts everywhere.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in (0, 1), 53-bit resolution, never exactly 0 or 1.
  double uniform() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Integer in [0, n), n >= 1. Modulo bias is irrelevant at our n << 2^64.
  std::uint64_t below(std::uint64_t n) { return engine_() % n; }

  bool bernoulli(double p) { return uniform() < p; }

  // Standard normal via Box-Muller (one value per pair, second discarded;
  // keeps the draw count per call fixed and the stream easy to reason about).
  double normal() {
    const double u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

  double normal(double mu, double sigma) { return mu + sigma * normal(); }

  // Normal truncated by rejection to |x - mu| <= k * sigma.
  double truncated_normal(double mu, double sigma, double k) {
    for (;;) {
      const double x = normal();
      if (x >= -k && x <= k) return mu + sigma * x;
    }
  }

 private:
  std::mt19937_64 engine_;
};

// Deterministic sub-seed derivation (splitmix64 finalizer over seed ^ salt).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt);

}  // namespace rpmguard
