#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "wjl/detail/format.hpp"
#include "wjl/error.hpp"
#include "wjl/norms.hpp"
#include "wjl/projection.hpp"
#include "wjl/random.hpp"

namespace wjl {

/// Shape of a random sparse (x, w) pair.
struct SparseSpec {
  std::size_t d = 200000;
  std::size_t l_x = 10;
  std::size_t l_w = 10;
  std::size_t l_overlap = 8;
  double norm_x = 1.0;
  std::uint64_t seed = 0;

  void validate() const {
    if (d == 0) throw InvalidArgument("sparse spec: d must be positive");
    if (l_x == 0) throw InvalidArgument("sparse spec: x needs at least one nonzero");
    if (l_overlap > std::min(l_x, l_w)) throw InvalidArgument("sparse spec: overlap exceeds a support size");
    if (l_x + l_w - l_overlap > d) throw InvalidArgument("sparse spec: supports do not fit in d dimensions");
    if (!(norm_x > 0.0)) throw InvalidArgument("sparse spec: norm_x must be positive");
  }
};

namespace detail {

/// Moves `count` uniformly chosen elements of `pool` to its front
/// (partial Fisher-Yates) and returns them.
inline std::vector<std::size_t> draw_without_replacement(std::vector<std::size_t>& pool, std::size_t count,
                                                         SplitMix64& rng) {
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(uniform_below(rng, pool.size() - i));
    std::swap(pool[i], pool[j]);
  }
  return {pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(count)};
}

/// Gaussian values on `support` (sorted in place), rescaled to Euclidean norm `norm`.
inline std::vector<double> gaussian_on_support(std::size_t d, std::vector<std::size_t>& support, double norm,
                                               SplitMix64& rng) {
  std::sort(support.begin(), support.end());
  std::vector<double> values(support.size());
  for (double& v : values) {
    do {
      v = standard_normal(rng);
    } while (v == 0.0);
  }
  const double scale = norm / euclidean_norm(values);
  std::vector<double> x(d, 0.0);
  for (std::size_t i = 0; i < support.size(); ++i) x[support[i]] = values[i] * scale;
  return x;
}

}  // namespace detail

/// x has exactly l_x nonzeros (standard normal, rescaled to ||x||_2 = norm_x);
/// w is 1 on exactly l_w coordinates; the supports share exactly l_overlap
/// uniformly chosen coordinates.
inline WeightedPair gen_pair(const SparseSpec& spec) {
  spec.validate();
  SplitMix64 rng(spec.seed);
  std::vector<std::size_t> pool(spec.d);
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  const std::size_t total = spec.l_x + spec.l_w - spec.l_overlap;
  const auto chosen = detail::draw_without_replacement(pool, total, rng);

  const auto overlap_end = chosen.begin() + static_cast<std::ptrdiff_t>(spec.l_overlap);
  const auto x_end = chosen.begin() + static_cast<std::ptrdiff_t>(spec.l_x);
  std::vector<std::size_t> x_support(chosen.begin(), x_end);
  std::vector<double> w(spec.d, 0.0);
  for (auto it = chosen.begin(); it != overlap_end; ++it) w[*it] = 1.0;
  for (auto it = x_end; it != chosen.end(); ++it) w[*it] = 1.0;

  auto x = detail::gaussian_on_support(spec.d, x_support, spec.norm_x, rng);
  return {std::move(x), std::move(w)};
}

/// A fresh x for a fixed weight support: l_overlap of its l_x nonzeros fall
/// inside `w_support`, the rest outside it.
inline std::vector<double> gen_x_for_support(std::size_t d, std::span<const std::size_t> w_support, std::size_t l_x,
                                             std::size_t l_overlap, double norm_x, std::uint64_t seed) {
  if (l_overlap > std::min(l_x, w_support.size())) throw InvalidArgument("gen_x: overlap exceeds a support size");
  if (l_x - l_overlap > d - w_support.size()) throw InvalidArgument("gen_x: not enough free coordinates");
  std::vector<bool> in_w(d, false);
  for (std::size_t i : w_support) {
    if (i >= d) throw DimensionMismatch("gen_x: support index out of range");
    in_w[i] = true;
  }
  SplitMix64 rng(seed);
  std::vector<std::size_t> inside(w_support.begin(), w_support.end());
  std::vector<std::size_t> outside;
  outside.reserve(d - inside.size());
  for (std::size_t i = 0; i < d; ++i)
    if (!in_w[i]) outside.push_back(i);
  auto support = detail::draw_without_replacement(inside, l_overlap, rng);
  const auto rest = detail::draw_without_replacement(outside, l_x - l_overlap, rng);
  support.insert(support.end(), rest.begin(), rest.end());
  return detail::gaussian_on_support(d, support, norm_x, rng);
}

inline std::vector<SparseEntry> to_sparse(std::span<const double> x) {
  std::vector<SparseEntry> out;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (x[i] != 0.0) out.push_back({i, x[i]});
  return out;
}

inline std::vector<std::size_t> support_of(std::span<const double> x) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (x[i] != 0.0) out.push_back(i);
  return out;
}

/// Sparse CSV: header `index,value`, one line per nonzero.
inline void write_sparse_csv(std::ostream& os, std::span<const double> x) {
  os << "index,value\n";
  for (std::size_t i = 0; i < x.size(); ++i)
    if (x[i] != 0.0) os << i << ',' << detail::format_double(x[i]) << '\n';
}

}  // namespace wjl
