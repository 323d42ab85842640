#pragma once

// Seeded random streams with platform-independent sampling.
//
// std::mt19937_64 output is fixed by the standard, but the std distributions
// are not, so every draw used by the library goes through the helpers below.

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>

namespace vbcast {

using Seed = std::uint64_t;

/// SplitMix64 finalizer. Used to derive independent per-point seeds.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept
{
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Seed for grid point `index` under `master`: mix64(master ^ mix64(index)).
constexpr Seed derive_seed(Seed master, std::uint64_t index) noexcept
{
  return mix64(master ^ mix64(index));
}

class Rng {
public:
  explicit Rng(Seed seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform integer in [lo, hi], unbiased (rejection on the top bucket).
  std::uint64_t uniform_int(std::uint64_t lo, std::uint64_t hi)
  {
    const std::uint64_t span = hi - lo;
    if (span == std::numeric_limits<std::uint64_t>::max())
      return next();
    const std::uint64_t range = span + 1;
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % range;
    std::uint64_t x;
    do {
      x = next();
    } while (x >= limit);
    return lo + x % range;
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Poisson draw by sequential inversion; large means are split into
  /// chunks so exp(-mean) stays representable.
  std::uint64_t poisson(double mean)
  {
    constexpr double chunk = 500.0;
    std::uint64_t total = 0;
    while (mean > chunk) {
      total += poisson_inversion(chunk);
      mean -= chunk;
    }
    return total + poisson_inversion(mean);
  }

private:
  std::uint64_t poisson_inversion(double mean)
  {
    if (mean <= 0.0)
      return 0;
    const double u = uniform01();
    double p = std::exp(-mean);
    double cdf = p;
    std::uint64_t k = 0;
    while (u >= cdf) {
      ++k;
      p *= mean / static_cast<double>(k);
      const double next_cdf = cdf + p;
      if (next_cdf == cdf)  // tail exhausted in double precision
        break;
      cdf = next_cdf;
    }
    return k;
  }

  std::mt19937_64 engine_;
};

} // namespace vbcast
