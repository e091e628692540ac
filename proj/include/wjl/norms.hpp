#pragma once

#include <cmath>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "wjl/detail/pairwise_sum.hpp"
#include "wjl/error.hpp"

namespace wjl {

/// An input vector together with its non-negative weight vector.
class WeightedPair {
 public:
  WeightedPair() = default;
  WeightedPair(std::vector<double> x, std::vector<double> w) : x_(std::move(x)), w_(std::move(w)) {
    validate(x_, w_);
  }

  static void validate(std::span<const double> x, std::span<const double> w) {
    if (x.size() != w.size())
      throw DimensionMismatch("weighted pair: x has " + std::to_string(x.size()) +
                              " entries, w has " + std::to_string(w.size()));
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (!(w[i] >= 0.0))
        throw InvalidArgument("weighted pair: weight " + std::to_string(i) + " is negative or NaN");
    }
  }

  std::span<const double> x() const noexcept { return x_; }
  std::span<const double> w() const noexcept { return w_; }
  std::size_t dim() const noexcept { return x_.size(); }

 private:
  std::vector<double> x_;
  std::vector<double> w_;
};

/// sum_i w_i^2 x_i^2
inline double weighted_sq_norm(std::span<const double> x, std::span<const double> w) {
  WeightedPair::validate(x, w);
  return detail::pairwise_sum<double>(0, x.size(), [&](std::size_t i) {
    const double t = w[i] * x[i];
    return t * t;
  });
}

inline double weighted_sq_norm(const WeightedPair& p) { return weighted_sq_norm(p.x(), p.w()); }

inline double sq_norm(std::span<const double> x) {
  return detail::pairwise_sum<double>(0, x.size(), [&](std::size_t i) { return x[i] * x[i]; });
}

inline double euclidean_norm(std::span<const double> x) { return std::sqrt(sq_norm(x)); }

/// (sum |x_i|^p)^(1/p) for p >= 1.
inline double p_norm(std::span<const double> x, double p) {
  if (!(p >= 1.0)) throw InvalidArgument("p_norm: p must be >= 1");
  if (p == 1.0)
    return detail::pairwise_sum<double>(0, x.size(), [&](std::size_t i) { return std::abs(x[i]); });
  if (p == 2.0) return euclidean_norm(x);
  const double s = detail::pairwise_sum<double>(0, x.size(),
                                                [&](std::size_t i) { return std::pow(std::abs(x[i]), p); });
  return std::pow(s, 1.0 / p);
}

/// Delta(x, w) = ||x||_2 ||w||_2 / ||x||_w. At least 1 by Cauchy-Schwarz.
inline double distortion(std::span<const double> x, std::span<const double> w) {
  const double wn = weighted_sq_norm(x, w);
  if (!(wn > 0.0)) throw InvalidArgument("distortion: weighted norm is zero");
  return euclidean_norm(x) * euclidean_norm(w) / std::sqrt(wn);
}

inline double distortion(const WeightedPair& p) { return distortion(p.x(), p.w()); }

}  // namespace wjl
