#pragma once

#include <cmath>
#include <span>

#include "wjl/detail/pairwise_sum.hpp"
#include "wjl/error.hpp"

namespace wjl::harness {

struct Summary {
  std::size_t n = 0;
  double mean = 0.0;
  double stddev = 0.0;  ///< sample standard deviation (n - 1 denominator)

  double standard_error() const { return n > 0 ? stddev / std::sqrt(static_cast<double>(n)) : 0.0; }
};

inline Summary summarize(std::span<const double> v) {
  if (v.empty()) throw InvalidArgument("summarize: no samples");
  Summary s;
  s.n = v.size();
  s.mean = detail::pairwise_sum<double>(v) / static_cast<double>(s.n);
  if (s.n > 1) {
    const double ss = detail::pairwise_sum<double>(0, s.n, [&](std::size_t i) {
      const double e = v[i] - s.mean;
      return e * e;
    });
    s.stddev = std::sqrt(ss / static_cast<double>(s.n - 1));
  }
  return s;
}

}  // namespace wjl::harness
