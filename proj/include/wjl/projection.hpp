#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "wjl/core_types.hpp"
#include "wjl/detail/binary_io.hpp"
#include "wjl/detail/format.hpp"
#include "wjl/detail/pairwise_sum.hpp"
#include "wjl/error.hpp"
#include "wjl/norms.hpp"
#include "wjl/random.hpp"

namespace wjl {

/// One nonzero coordinate of a sparse vector.
struct SparseEntry {
  std::size_t index = 0;
  double value = 0.0;

  friend bool operator==(const SparseEntry&, const SparseEntry&) = default;
};

/// k x d random matrix over {1, i, -1, -i}.
///
/// Entries are never stored. Row i is the SplitMix64 stream keyed by
/// mix_seed(seed, i); each 64-bit output packs 32 consecutive entries, two
/// bits each, lowest bits first. Any entry is therefore O(1) to regenerate,
/// rows are independent of each other, and the matrix costs O(1) memory at
/// any (k, d).
class ProjectionMatrix {
 public:
  static constexpr std::size_t kEntriesPerWord = 32;

  ProjectionMatrix(std::size_t d, std::size_t k, std::uint64_t seed) : d_(d), k_(k), seed_(seed) {
    if (d == 0) throw InvalidArgument("projection matrix: d must be positive");
    if (k == 0) throw InvalidArgument("projection matrix: k must be positive");
  }

  std::size_t d() const noexcept { return d_; }
  std::size_t k() const noexcept { return k_; }
  std::uint64_t seed() const noexcept { return seed_; }

  std::uint64_t row_key(std::size_t row) const noexcept { return mix_seed(seed_, row); }

  /// Packed word `word` of row `row` (entries 32*word .. 32*word+31).
  static std::uint64_t packed_word(std::uint64_t row_key, std::size_t word) noexcept {
    return SplitMix64::at(row_key, word);
  }

  std::size_t words_per_row() const noexcept { return (d_ + kEntriesPerWord - 1) / kEntriesPerWord; }

  ComplexUnit entry(std::size_t row, std::size_t col) const noexcept {
    const std::uint64_t w = packed_word(row_key(row), col / kEntriesPerWord);
    return ComplexUnit(static_cast<unsigned>(w >> (2 * (col % kEntriesPerWord))));
  }

  /// Writes row `row` as packed words; `out` must hold words_per_row() words.
  /// Bits past column d-1 in the last word are cleared.
  void packed_row(std::size_t row, std::span<std::uint64_t> out) const {
    if (out.size() < words_per_row()) throw DimensionMismatch("packed_row: output buffer too small");
    const std::uint64_t key = row_key(row);
    for (std::size_t b = 0; b < words_per_row(); ++b) out[b] = packed_word(key, b);
    if (const std::size_t tail = d_ % kEntriesPerWord; tail != 0)
      out[words_per_row() - 1] &= (std::uint64_t{1} << (2 * tail)) - 1;
  }

  friend bool operator==(const ProjectionMatrix&, const ProjectionMatrix&) = default;

 private:
  std::size_t d_;
  std::size_t k_;
  std::uint64_t seed_;
};

inline ProjectionMatrix sample_matrix(std::size_t d, std::size_t k, std::uint64_t seed) {
  return ProjectionMatrix(d, k, seed);
}

/// g(x) = Ax / sqrt(k), tagged with the matrix it came from.
class ReducedVector {
 public:
  static constexpr std::string_view kMagic = "WJLR";
  static constexpr std::uint16_t kFormatVersion = 1;

  ReducedVector(std::vector<Complex> values, std::uint64_t matrix_seed, std::size_t dims_d)
      : values_(std::move(values)), matrix_seed_(matrix_seed), dims_d_(dims_d) {
    if (values_.empty()) throw InvalidArgument("reduced vector: k must be positive");
  }

  std::size_t k() const noexcept { return values_.size(); }
  std::span<const Complex> values() const noexcept { return values_; }
  std::uint64_t matrix_seed() const noexcept { return matrix_seed_; }
  std::size_t dims_d() const noexcept { return dims_d_; }

  bool same_provenance(const ReducedVector& o) const noexcept {
    return k() == o.k() && matrix_seed_ == o.matrix_seed_ && dims_d_ == o.dims_d_;
  }

  void require_same_provenance(const ReducedVector& o) const {
    if (!same_provenance(o))
      throw ProvenanceMismatch("reduced vectors come from different matrices (seed " +
                               std::to_string(matrix_seed_) + " k " + std::to_string(k()) + " d " +
                               std::to_string(dims_d_) + " vs seed " + std::to_string(o.matrix_seed_) +
                               " k " + std::to_string(o.k()) + " d " + std::to_string(o.dims_d_) + ")");
  }

  friend ReducedVector operator+(const ReducedVector& a, const ReducedVector& b) {
    a.require_same_provenance(b);
    std::vector<Complex> v(a.k());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = a.values_[i] + b.values_[i];
    return {std::move(v), a.matrix_seed_, a.dims_d_};
  }

  friend ReducedVector operator-(const ReducedVector& a, const ReducedVector& b) {
    a.require_same_provenance(b);
    std::vector<Complex> v(a.k());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = a.values_[i] - b.values_[i];
    return {std::move(v), a.matrix_seed_, a.dims_d_};
  }

  friend bool operator==(const ReducedVector&, const ReducedVector&) = default;

  /// "WJLR", version u16, k u32, d u32, matrix seed u64, then k (re, im) f64 pairs.
  /// All fields little-endian.
  std::string serialize() const {
    if (k() > std::numeric_limits<std::uint32_t>::max() || dims_d_ > std::numeric_limits<std::uint32_t>::max())
      throw InvalidArgument("reduced vector: k or d exceeds the u32 range of the binary format");
    detail::ByteWriter out;
    out.magic(kMagic);
    out.u16(kFormatVersion);
    out.u32(static_cast<std::uint32_t>(k()));
    out.u32(static_cast<std::uint32_t>(dims_d_));
    out.u64(matrix_seed_);
    for (const Complex& z : values_) {
      out.f64(z.real());
      out.f64(z.imag());
    }
    return std::move(out).bytes();
  }

  static ReducedVector deserialize(std::string_view bytes) {
    detail::ByteReader in(bytes);
    in.expect_magic(kMagic);
    if (const auto version = in.u16(); version != kFormatVersion)
      throw FormatError("reduced vector: unsupported version " + std::to_string(version));
    const std::uint32_t k = in.u32();
    const std::uint32_t d = in.u32();
    const std::uint64_t seed = in.u64();
    if (k == 0 || d == 0) throw FormatError("reduced vector: zero dimension");
    if (in.remaining() != std::size_t{k} * 16) throw FormatError("reduced vector: payload size does not match k");
    std::vector<Complex> values(k);
    for (auto& z : values) {
      const double re = in.f64();
      const double im = in.f64();
      z = {re, im};
    }
    return {std::move(values), seed, d};
  }

  /// Header line `index,re,im`, then one row per component.
  void write_csv(std::ostream& os) const {
    os << "index,re,im\n";
    for (std::size_t i = 0; i < values_.size(); ++i)
      os << i << ',' << detail::format_double(values_[i].real()) << ','
         << detail::format_double(values_[i].imag()) << '\n';
  }

 private:
  std::vector<Complex> values_;
  std::uint64_t matrix_seed_;
  std::size_t dims_d_;
};

/// Dense reduction. Touches every matrix entry: O(k d).
inline ReducedVector reduce(const ProjectionMatrix& a, std::span<const double> x) {
  if (x.size() != a.d())
    throw DimensionMismatch("reduce: vector has " + std::to_string(x.size()) + " entries, matrix expects " +
                            std::to_string(a.d()));
  const double sqrt_k = std::sqrt(static_cast<double>(a.k()));
  const std::size_t full_words = a.d() / ProjectionMatrix::kEntriesPerWord;
  std::vector<Complex> values(a.k());
  for (std::size_t i = 0; i < a.k(); ++i) {
    const std::uint64_t key = a.row_key(i);
    double parts[2] = {0.0, 0.0};
    std::size_t j = 0;
    for (std::size_t b = 0; b < full_words; ++b) {
      std::uint64_t word = ProjectionMatrix::packed_word(key, b);
      for (std::size_t e = 0; e < ProjectionMatrix::kEntriesPerWord; ++e, ++j, word >>= 2)
        detail::unit_add(parts, static_cast<unsigned>(word & 3u), x[j]);
    }
    if (j < a.d()) {
      std::uint64_t word = ProjectionMatrix::packed_word(key, full_words);
      for (; j < a.d(); ++j, word >>= 2) detail::unit_add(parts, static_cast<unsigned>(word & 3u), x[j]);
    }
    values[i] = Complex(parts[0] / sqrt_k, parts[1] / sqrt_k);
  }
  return {std::move(values), a.seed(), a.d()};
}

/// Sparse reduction. Touches only the columns named in `x`: O(k * nnz).
/// Entries are accumulated in the order given; with ascending indices the
/// result is bit-identical to the dense path.
inline ReducedVector reduce(const ProjectionMatrix& a, std::span<const SparseEntry> x) {
  for (const SparseEntry& e : x) {
    if (e.index >= a.d())
      throw DimensionMismatch("reduce: sparse index " + std::to_string(e.index) + " out of range for d=" +
                              std::to_string(a.d()));
  }
  const double sqrt_k = std::sqrt(static_cast<double>(a.k()));
  std::vector<Complex> values(a.k());
  for (std::size_t i = 0; i < a.k(); ++i) {
    const std::uint64_t key = a.row_key(i);
    double parts[2] = {0.0, 0.0};
    for (const SparseEntry& e : x) {
      const std::uint64_t word = ProjectionMatrix::packed_word(key, e.index / ProjectionMatrix::kEntriesPerWord);
      const auto exponent = static_cast<unsigned>(word >> (2 * (e.index % ProjectionMatrix::kEntriesPerWord)));
      detail::unit_add(parts, exponent, e.value);
    }
    values[i] = Complex(parts[0] / sqrt_k, parts[1] / sqrt_k);
  }
  return {std::move(values), a.seed(), a.d()};
}

/// rho(x, w) = Re[k * sum_i (g(x)_i g(w)_i)^2], an unbiased estimate of ||x||_w^2.
/// Not a norm: individual estimates can be negative.
inline double rho(const ReducedVector& gx, const ReducedVector& gw) {
  gx.require_same_provenance(gw);
  const auto a = gx.values();
  const auto b = gw.values();
  const double s = detail::pairwise_sum<double>(0, a.size(), [&](std::size_t i) {
    const Complex z = a[i] * b[i];
    return z.real() * z.real() - z.imag() * z.imag();
  });
  return static_cast<double>(gx.k()) * s;
}

/// rho(x - y, w) from g(x), g(y) and g(w) alone, using linearity of g.
inline double rho_pairwise(const ReducedVector& gx, const ReducedVector& gy, const ReducedVector& gw) {
  gx.require_same_provenance(gy);
  gx.require_same_provenance(gw);
  const auto a = gx.values();
  const auto c = gy.values();
  const auto b = gw.values();
  const double s = detail::pairwise_sum<double>(0, a.size(), [&](std::size_t i) {
    const Complex z = (a[i] - c[i]) * b[i];
    return z.real() * z.real() - z.imag() * z.imag();
  });
  return static_cast<double>(gx.k()) * s;
}

/// Inputs to the reduced-dimension planner.
///
/// `c` is the universal constant of the tail bound. The default 576 is the
/// constant that falls out of the concentration proof; the decoupling
/// constant C is folded into delta, so the planner evaluates ln(1/delta).
struct PlanParams {
  double epsilon = 0.1;
  double delta = 0.05;
  double delta_threshold = 1.0;  ///< upper bound on the distortion Delta(x, w)
  double c = 576.0;

  void validate() const {
    if (!(epsilon > 0.0 && epsilon <= 1.0)) throw InvalidArgument("plan: epsilon must lie in (0, 1]");
    if (!(delta > 0.0 && delta < 1.0)) throw InvalidArgument("plan: delta must lie in (0, 1)");
    if (!(delta_threshold > 0.0)) throw InvalidArgument("plan: distortion threshold must be positive");
    if (!(c > 0.0)) throw InvalidArgument("plan: c must be positive");
  }
};

/// k = ceil(c Delta^4 ln(1/delta) / epsilon^2).
inline std::size_t required_k(const PlanParams& p) {
  p.validate();
  const double d2 = p.delta_threshold * p.delta_threshold;
  const double v = p.c * d2 * d2 * std::log(1.0 / p.delta) / (p.epsilon * p.epsilon);
  return static_cast<std::size_t>(std::max(1.0, detail::snapped_ceil(v)));
}

/// The cruder bounded-difference planner:
///   k = ceil((||x||_1 ||w||_1 / ||x||_w)^4 ln(2/delta) / epsilon^2).
/// Always at least as large as required_k's distortion term, since ||.||_1 >= ||.||_2.
inline std::size_t hoeffding_k(std::span<const double> x, std::span<const double> w, double epsilon, double delta) {
  if (!(epsilon > 0.0 && epsilon <= 1.0)) throw InvalidArgument("hoeffding_k: epsilon must lie in (0, 1]");
  if (!(delta > 0.0 && delta < 1.0)) throw InvalidArgument("hoeffding_k: delta must lie in (0, 1)");
  const double wn = weighted_sq_norm(x, w);
  if (!(wn > 0.0)) throw InvalidArgument("hoeffding_k: weighted norm is zero");
  const double ratio = p_norm(x, 1.0) * p_norm(w, 1.0) / std::sqrt(wn);
  const double r2 = ratio * ratio;
  const double v = r2 * r2 * std::log(2.0 / delta) / (epsilon * epsilon);
  return static_cast<std::size_t>(std::max(1.0, detail::snapped_ceil(v)));
}

}  // namespace wjl
