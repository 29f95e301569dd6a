#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>

namespace learnrate {

// SplitMix64 finalizer. Fixed forever: alternate implementations rely on it
// to derive the same per-trial seeds.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Seed for stream `index` under master seed `seed`. Order-independent, so
// trials can be generated in any order or in parallel.
constexpr std::uint64_t derive_seed(std::uint64_t seed,
                                    std::uint64_t index) noexcept {
  return mix64(seed ^ mix64(index));
}

// Thin wrapper around mt19937_64. The variate transforms are written out
// explicitly (inverse CDF) rather than going through <random> distributions,
// whose algorithms differ between standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform on (0, 1].
  double uniform_open_closed() {
    return static_cast<double>((engine_() >> 11) + 1) * 0x1.0p-53;
  }

  // Uniform on (0, 1).
  double uniform_open() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  // Unit exponential.
  double exponential() { return -std::log(uniform_open_closed()); }

  // Uniform integer in [0, bound). Lemire's multiply-shift with rejection.
  std::uint64_t below(std::uint64_t bound) {
    __extension__ using u128 = unsigned __int128;
    std::uint64_t x = engine_();
    u128 m = static_cast<u128>(x) * bound;
    auto low = static_cast<std::uint64_t>(m);
    if (low < bound) {
      const std::uint64_t threshold = (0 - bound) % bound;
      while (low < threshold) {
        x = engine_();
        m = static_cast<u128>(x) * bound;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  // Number of teacher samples consumed while holding a wrong set whose gap
  // (1 - overlap) is `gap`; the rejecting sample is counted, so the result is
  // >= 1 with P(result > k) = (1 - gap)^k.
  std::int64_t dwell(double gap) {
    if (gap >= 1.0) return 1;
    const double u = uniform_open_closed();
    const double k = std::floor(std::log(u) / std::log1p(-gap));
    constexpr double cap = 0x1.0p62;
    return 1 + static_cast<std::int64_t>(k < cap ? k : cap);
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace learnrate
