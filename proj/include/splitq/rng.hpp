#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace splitq {

// Deterministic random source used everywhere in the library.
//
// Engine: xoshiro256++ (Blackman & Vigna), state seeded from a single
// 64-bit value via SplitMix64. All derived quantities (uniform doubles,
// bounded integers, normal and gamma variates) are produced by the
// explicit algorithms below rather than std:: distributions, so a given
// seed yields the same stream on every platform and standard library.
class RandomSource {
 public:
  explicit RandomSource(std::uint64_t seed) {
    std::uint64_t x = seed;
    for (auto& word : state_) word = split_mix64(x);
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // Uniform double in [0, 1) with 53 random bits.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform integer in [0, bound), bias-free via rejection.
  std::uint64_t next_below(std::uint64_t bound) {
    if (bound == 0) throw std::invalid_argument("next_below: bound must be positive");
    const std::uint64_t threshold = (0 - bound) % bound;  // 2^64 mod bound
    std::uint64_t x = next_u64();
    while (x < threshold) x = next_u64();
    return x % bound;
  }

  // Marsaglia polar method; the second variate of each pair is discarded
  // to keep the generator state a pure function of the call sequence.
  double next_normal(double mean, double stddev) {
    double u, v, s;
    do {
      u = 2.0 * next_double() - 1.0;
      v = 2.0 * next_double() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    return mean + stddev * u * std::sqrt(-2.0 * std::log(s) / s);
  }

  // Marsaglia-Tsang squeeze method, unit scale. Callers only need
  // shape >= 1 (integer counts plus a uniform prior).
  double next_gamma(double shape) {
    if (shape < 1.0) throw std::invalid_argument("next_gamma: shape must be >= 1");
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x, v;
      do {
        x = next_normal(0.0, 1.0);
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = next_double();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
  }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  static std::uint64_t split_mix64(std::uint64_t& x) {
    x += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::array<std::uint64_t, 4> state_;
};

// Derives an independent 64-bit seed from (master, index, tag).
// Used by the experiment harness to give every trial/role its own stream;
// the SplitMix64 finalizer decorrelates even adjacent indices.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index,
                                 std::uint64_t tag) {
  auto mix = [](std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  };
  std::uint64_t x = mix(master + 0x9E3779B97F4A7C15ULL * (index + 1));
  x = mix(x ^ (tag * 0xD2B74407B1CE6E93ULL + 0x8BB84B93962EACC9ULL));
  return x;
}

}  // namespace splitq
