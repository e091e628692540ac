#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>

namespace wjl {

inline constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ULL;
inline constexpr std::uint64_t kMixGammaJ = 0xC2B2AE3D27D4EB4FULL;

/// SplitMix64 output finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Derives a child seed from (seed, i, j):
///   mix64(seed ^ (i * 0x9E3779B97F4A7C15) ^ (j * 0xC2B2AE3D27D4EB4F)).
/// Used for per-cell sketch hashes and per-trial matrix seeds.
constexpr std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t i, std::uint64_t j = 0) noexcept {
  return mix64(seed ^ (i * kGoldenGamma) ^ (j * kMixGammaJ));
}

/// SplitMix64 generator. Satisfies UniformRandomBitGenerator.
///
/// The n-th output (0-based) is mix64(state0 + (n+1)*gamma), so any position of
/// the stream can be computed directly; see `at`.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  constexpr explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  constexpr result_type operator()() noexcept {
    state_ += kGoldenGamma;
    return mix64(state_);
  }

  /// The n-th output of a generator started from `seed`, without stepping.
  static constexpr result_type at(std::uint64_t seed, std::uint64_t n) noexcept {
    return mix64(seed + (n + 1) * kGoldenGamma);
  }

 private:
  std::uint64_t state_;
};

/// Uniform integer in [0, bound) by Lemire's multiply-shift with rejection.
template <class Rng>
std::uint64_t uniform_below(Rng& rng, std::uint64_t bound) {
  using u128 = unsigned __int128;
  std::uint64_t x = rng();
  u128 m = static_cast<u128>(x) * bound;
  auto low = static_cast<std::uint64_t>(m);
  if (low < bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    while (low < threshold) {
      x = rng();
      m = static_cast<u128>(x) * bound;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

/// Uniform double in [0, 1) from the top 53 bits.
template <class Rng>
double uniform_unit(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Standard normal deviate by Box-Muller. Spelled out rather than using
/// std::normal_distribution so generated inputs match across standard libraries.
template <class Rng>
double standard_normal(Rng& rng) {
  double u1 = 0.0;
  do {
    u1 = uniform_unit(rng);
  } while (u1 == 0.0);
  const double u2 = uniform_unit(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace wjl
