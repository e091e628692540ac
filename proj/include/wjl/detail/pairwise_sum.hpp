#pragma once

#include <cstddef>
#include <span>

namespace wjl::detail {

/// Pairwise (cascade) summation with a short sequential base case.
/// Error grows as O(log n) instead of O(n).
template <class T, class F>
T pairwise_sum(std::size_t begin, std::size_t end, const F& term) {
  constexpr std::size_t kBlock = 8;
  const std::size_t n = end - begin;
  if (n <= kBlock) {
    T acc{};
    for (std::size_t i = begin; i < end; ++i) acc += term(i);
    return acc;
  }
  const std::size_t mid = begin + n / 2;
  return pairwise_sum<T>(begin, mid, term) + pairwise_sum<T>(mid, end, term);
}

template <class T>
T pairwise_sum(std::span<const T> values) {
  return pairwise_sum<T>(0, values.size(), [&](std::size_t i) { return values[i]; });
}

}  // namespace wjl::detail
