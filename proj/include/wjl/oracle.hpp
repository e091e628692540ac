#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include "wjl/core_types.hpp"
#include "wjl/detail/pairwise_sum.hpp"
#include "wjl/error.hpp"
#include "wjl/hashing.hpp"
#include "wjl/norms.hpp"
#include "wjl/sketch.hpp"

namespace wjl {

/// Largest dimension the exhaustive oracles accept (4^8 = 65536 assignments).
inline constexpr std::size_t kMaxEnumerationDim = 8;

namespace detail {

inline void check_enumerable(std::span<const double> x, std::span<const double> w) {
  WeightedPair::validate(x, w);
  if (x.empty()) throw InvalidArgument("oracle: empty vectors");
  if (x.size() > kMaxEnumerationDim)
    throw InvalidArgument("oracle: d=" + std::to_string(x.size()) + " is too large to enumerate (max 8)");
}

/// Digit j of `code` in base 4.
inline unsigned base4_digit(std::size_t code, std::size_t j) { return static_cast<unsigned>((code >> (2 * j)) & 3u); }

}  // namespace detail

/// Exact E[rho(x, w)] for k = 1: the mean of Re[(a.x)^2 (a.w)^2] over all 4^d
/// rows a in {1, i, -1, -i}^d. Computed with plain complex arithmetic, sharing
/// no code with the projection path.
inline double exact_rho_expectation(std::span<const double> x, std::span<const double> w) {
  detail::check_enumerable(x, w);
  static const std::array<std::complex<double>, 4> kUnits = {
      std::complex<double>(1, 0), std::complex<double>(0, 1), std::complex<double>(-1, 0),
      std::complex<double>(0, -1)};
  const std::size_t d = x.size();
  const std::size_t rows = std::size_t{1} << (2 * d);
  const double total = detail::pairwise_sum<double>(0, rows, [&](std::size_t code) {
    std::complex<double> sx = 0.0;
    std::complex<double> sw = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      const auto a = kUnits[detail::base4_digit(code, j)];
      sx += a * x[j];
      sw += a * w[j];
    }
    return (sx * sx * sw * sw).real();
  });
  return total / static_cast<double>(rows);
}

/// Exact expectation of the r = m = 1 sketch estimate: the mean over all 4^d
/// joint hash outcomes (h(0), ..., h(d-1)) of the estimate produced by
/// turnstile-sketching x and w through a forced-value hash table.
inline double exact_sketch_expectation(std::span<const double> x, std::span<const double> w) {
  detail::check_enumerable(x, w);
  const std::size_t d = x.size();
  const std::size_t outcomes = std::size_t{1} << (2 * d);
  const SketchConfig cfg{1, 1, 0, SketchMode::turnstile};
  const double total = detail::pairwise_sum<double>(0, outcomes, [&](std::size_t code) {
    std::vector<ComplexUnit> table(d);
    for (std::size_t j = 0; j < d; ++j) table[j] = ComplexUnit(detail::base4_digit(code, j));
    BasicStreamSketch<TableHash> sx(cfg, {TableHash(std::move(table))});
    auto sw = sx.sibling();
    for (std::size_t j = 0; j < d; ++j) {
      sx.update(j, x[j]);
      sw.update(j, w[j]);
    }
    return estimate(sx, sw).value;
  });
  return total / static_cast<double>(outcomes);
}

}  // namespace wjl
