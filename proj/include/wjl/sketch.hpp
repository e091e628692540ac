#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
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
#include "wjl/hashing.hpp"
#include "wjl/random.hpp"

namespace wjl {

/// How the hashed key of an update is interpreted.
///   timestep:  key = arrival position t, value = x_t
///   turnstile: key = coordinate index i, value = increment to x_i
enum class SketchMode : std::uint8_t { timestep = 0, turnstile = 1 };

inline std::string_view to_string(SketchMode m) { return m == SketchMode::timestep ? "timestep" : "turnstile"; }

inline SketchMode parse_sketch_mode(std::string_view s) {
  if (s == "timestep") return SketchMode::timestep;
  if (s == "turnstile") return SketchMode::turnstile;
  throw InvalidArgument("unknown sketch mode \"" + std::string(s) + "\" (expected timestep or turnstile)");
}

struct SketchConfig {
  std::size_t r = 1;  ///< rows; the estimate is the median over rows
  std::size_t m = 1;  ///< columns; each row averages its m cells
  std::uint64_t seed = 0;
  SketchMode mode = SketchMode::turnstile;

  void validate() const {
    if (r == 0 || m == 0) throw InvalidArgument("sketch config: r and m must be positive");
  }

  std::size_t cells() const noexcept { return r * m; }

  friend bool operator==(const SketchConfig&, const SketchConfig&) = default;
};

struct SketchDims {
  std::size_t r = 1;
  std::size_t m = 1;

  friend bool operator==(const SketchDims&, const SketchDims&) = default;
};

/// m = ceil(136 Delta^4 / epsilon^2) + 1 and r = the smallest odd integer
/// strictly greater than 12 ln(1/delta).
inline SketchDims plan_sketch(double epsilon, double delta, double distortion) {
  if (!(epsilon > 0.0 && epsilon <= 1.0)) throw InvalidArgument("plan_sketch: epsilon must lie in (0, 1]");
  if (!(delta > 0.0 && delta < 1.0)) throw InvalidArgument("plan_sketch: delta must lie in (0, 1)");
  if (!(distortion >= 1.0)) throw InvalidArgument("plan_sketch: distortion must be at least 1");
  const double d2 = distortion * distortion;
  const double m = detail::snapped_ceil(136.0 * d2 * d2 / (epsilon * epsilon)) + 1.0;
  const double bound = 12.0 * std::log(1.0 / delta);
  double r = detail::snapped_ceil(bound);
  if (r <= bound || std::abs(r - bound) <= 1e-9 * std::max(1.0, bound)) r += 1.0;
  if (std::fmod(r, 2.0) == 0.0) r += 1.0;
  return {static_cast<std::size_t>(r), static_cast<std::size_t>(m)};
}

struct WeightedNormEstimate {
  double value = 0.0;  ///< median of the row estimates; not clamped, may be negative
  std::size_t r_used = 0;
  std::size_t m_used = 0;

  bool negative() const noexcept { return value < 0.0; }
};

/// Median of `values` (copied). Odd count: the middle order statistic. Even
/// count: the mean of the two middle order statistics.
inline double median(std::vector<double> values) {
  if (values.empty()) throw InvalidArgument("median of an empty set");
  const std::size_t n = values.size();
  const auto mid = values.begin() + static_cast<std::ptrdiff_t>(n / 2);
  std::nth_element(values.begin(), mid, values.end());
  if (n % 2 == 1) return *mid;
  const double upper = *mid;
  const double lower = *std::max_element(values.begin(), mid);
  return 0.5 * (lower + upper);
}

/// r x m complex counters C[i][j] += v * h_ij(key) over a stream of updates.
///
/// Sketches are comparable only when they share the hash family; estimate and
/// merge reject anything else. Hashes live in a shared immutable array so
/// sibling sketches (x and w of one query) do not duplicate them.
template <class Hash>
class BasicStreamSketch {
 public:
  static constexpr std::string_view kMagic = "WJLS";
  static constexpr std::uint16_t kFormatVersion = 1;
  static constexpr std::size_t kHeaderSize = 4 + 2 + 1 + 4 + 4 + 8 + 8;

  /// Hashes derived from the config seed: h_ij = Hash::from_seed(mix_seed(seed, i, j)).
  explicit BasicStreamSketch(const SketchConfig& cfg)
    requires requires(std::uint64_t s) { Hash::from_seed(s); }
      : config_(checked(cfg)), counters_(cfg.cells()) {
    std::vector<Hash> hashes;
    hashes.reserve(cfg.cells());
    for (std::size_t i = 0; i < cfg.r; ++i)
      for (std::size_t j = 0; j < cfg.m; ++j) hashes.push_back(Hash::from_seed(mix_seed(cfg.seed, i, j)));
    hashes_ = std::make_shared<const std::vector<Hash>>(std::move(hashes));
  }

  /// Explicit hashes, row-major, r*m of them.
  BasicStreamSketch(const SketchConfig& cfg, std::vector<Hash> hashes)
      : config_(checked(cfg)), counters_(cfg.cells()) {
    if (hashes.size() != cfg.cells()) throw InvalidArgument("sketch: need exactly r*m hash functions");
    hashes_ = std::make_shared<const std::vector<Hash>>(std::move(hashes));
  }

  /// A zeroed sketch over the same hash family.
  BasicStreamSketch sibling() const {
    BasicStreamSketch s(*this);
    std::fill(s.counters_.begin(), s.counters_.end(), Complex{});
    s.items_seen_ = 0;
    return s;
  }

  const SketchConfig& config() const noexcept { return config_; }
  std::span<const Complex> counters() const noexcept { return counters_; }
  std::span<const Hash> hashes() const noexcept { return *hashes_; }
  std::uint64_t items_seen() const noexcept { return items_seen_; }

  Complex counter(std::size_t i, std::size_t j) const { return counters_.at(i * config_.m + j); }

  /// C[i][j] += value * h_ij(key) for every cell.
  void update(std::uint64_t key, double value) {
    const auto& hashes = *hashes_;
    if constexpr (requires { Hash::powers(key); }) {
      const auto powers = Hash::powers(key);
      for (std::size_t c = 0; c < counters_.size(); ++c) {
        auto& parts = reinterpret_cast<double(&)[2]>(counters_[c]);
        detail::unit_add(parts, hashes[c].eval_at(powers).exponent(), value);
      }
    } else {
      for (const Hash& h : hashes) h.check_point(key);
      for (std::size_t c = 0; c < counters_.size(); ++c) {
        auto& parts = reinterpret_cast<double(&)[2]>(counters_[c]);
        detail::unit_add(parts, hashes[c].eval_unchecked(key).exponent(), value);
      }
    }
    ++items_seen_;
  }

  bool shares_hashes_with(const BasicStreamSketch& o) const {
    return config_ == o.config_ && (hashes_ == o.hashes_ || *hashes_ == *o.hashes_);
  }

  void require_compatible(const BasicStreamSketch& o) const {
    if (!shares_hashes_with(o))
      throw ProvenanceMismatch("sketches use different configurations or hash families");
  }

  /// Elementwise counter sum a + b; items_seen adds.
  friend BasicStreamSketch merge(const BasicStreamSketch& a, const BasicStreamSketch& b) {
    a.require_compatible(b);
    BasicStreamSketch out(a);
    for (std::size_t c = 0; c < out.counters_.size(); ++c) out.counters_[c] = a.counters_[c] + b.counters_[c];
    out.items_seen_ = a.items_seen_ + b.items_seen_;
    return out;
  }

  static constexpr std::size_t serialized_size(std::size_t r, std::size_t m) {
    return kHeaderSize + r * m * (16 + Hash::kSerializedSize);
  }

  /// "WJLS", version u16, mode u8, r u32, m u32, seed u64, items_seen u64,
  /// r*m (re, im) f64 counter pairs, then r*m serialized hashes. Little-endian.
  std::string serialize() const
    requires requires(const Hash& h, detail::ByteWriter& w) { h.serialize_to(w); }
  {
    detail::ByteWriter out;
    out.magic(kMagic);
    out.u16(kFormatVersion);
    out.u8(static_cast<std::uint8_t>(config_.mode));
    out.u32(static_cast<std::uint32_t>(config_.r));
    out.u32(static_cast<std::uint32_t>(config_.m));
    out.u64(config_.seed);
    out.u64(items_seen_);
    for (const Complex& z : counters_) {
      out.f64(z.real());
      out.f64(z.imag());
    }
    for (const Hash& h : *hashes_) h.serialize_to(out);
    return std::move(out).bytes();
  }

  static BasicStreamSketch deserialize(std::string_view bytes)
    requires requires(detail::ByteReader& r) { Hash::deserialize_from(r); }
  {
    detail::ByteReader in(bytes);
    in.expect_magic(kMagic);
    if (const auto version = in.u16(); version != kFormatVersion)
      throw FormatError("sketch: unsupported version " + std::to_string(version));
    SketchConfig cfg;
    const std::uint8_t mode = in.u8();
    if (mode > 1) throw FormatError("sketch: unknown mode byte");
    cfg.mode = static_cast<SketchMode>(mode);
    cfg.r = in.u32();
    cfg.m = in.u32();
    cfg.seed = in.u64();
    if (cfg.r == 0 || cfg.m == 0) throw FormatError("sketch: zero dimension");
    const std::uint64_t items = in.u64();
    if (in.remaining() != serialized_size(cfg.r, cfg.m) - kHeaderSize)
      throw FormatError("sketch: payload size does not match r*m");
    std::vector<Complex> counters(cfg.cells());
    for (auto& z : counters) {
      const double re = in.f64();
      const double im = in.f64();
      z = {re, im};
    }
    std::vector<Hash> hashes;
    hashes.reserve(cfg.cells());
    for (std::size_t c = 0; c < cfg.cells(); ++c) hashes.push_back(Hash::deserialize_from(in));
    BasicStreamSketch s(cfg, std::move(hashes));
    s.counters_ = std::move(counters);
    s.items_seen_ = items;
    return s;
  }

  friend bool operator==(const BasicStreamSketch& a, const BasicStreamSketch& b) {
    return a.shares_hashes_with(b) && a.counters_ == b.counters_ && a.items_seen_ == b.items_seen_;
  }

 private:
  static const SketchConfig& checked(const SketchConfig& cfg) {
    cfg.validate();
    return cfg;
  }

  SketchConfig config_;
  std::vector<Complex> counters_;
  std::shared_ptr<const std::vector<Hash>> hashes_;
  std::uint64_t items_seen_ = 0;
};

using StreamSketch = BasicStreamSketch<HashPolynomial>;

/// Per-cell estimates (C_x[i][j] C_w[i][j])^2, row-major. The product is
/// squared once rather than squaring each counter; both orders agree
/// algebraically and this one fixes the rounding.
template <class Hash>
std::vector<Complex> cell_estimates(const BasicStreamSketch<Hash>& sx, const BasicStreamSketch<Hash>& sw) {
  sx.require_compatible(sw);
  const auto cx = sx.counters();
  const auto cw = sw.counters();
  std::vector<Complex> out(cx.size());
  for (std::size_t c = 0; c < cx.size(); ++c) {
    const Complex z = cx[c] * cw[c];
    out[c] = z * z;
  }
  return out;
}

/// Re of each row's mean cell estimate.
template <class Hash>
std::vector<double> row_estimates(const BasicStreamSketch<Hash>& sx, const BasicStreamSketch<Hash>& sw) {
  const auto cells = cell_estimates(sx, sw);
  const std::size_t m = sx.config().m;
  std::vector<double> rows(sx.config().r);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const std::span<const Complex> row(cells.data() + i * m, m);
    rows[i] = detail::pairwise_sum<Complex>(row).real() / static_cast<double>(m);
  }
  return rows;
}

/// Median-of-means estimate of ||x||_w^2 from the sketches of x and w.
template <class Hash>
WeightedNormEstimate estimate(const BasicStreamSketch<Hash>& sx, const BasicStreamSketch<Hash>& sw) {
  return {median(row_estimates(sx, sw)), sx.config().r, sx.config().m};
}

inline StreamSketch sketch_new(const SketchConfig& cfg) { return StreamSketch(cfg); }

template <class Hash>
void sketch_update(BasicStreamSketch<Hash>& s, std::uint64_t key, double value) {
  s.update(key, value);
}

template <class Hash>
WeightedNormEstimate sketch_estimate(const BasicStreamSketch<Hash>& sx, const BasicStreamSketch<Hash>& sw) {
  return estimate(sx, sw);
}

template <class Hash>
BasicStreamSketch<Hash> sketch_merge(const BasicStreamSketch<Hash>& a, const BasicStreamSketch<Hash>& b) {
  return merge(a, b);
}

}  // namespace wjl
