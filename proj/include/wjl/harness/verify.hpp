#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include "wjl/generators.hpp"
#include "wjl/hashing.hpp"
#include "wjl/norms.hpp"
#include "wjl/oracle.hpp"
#include "wjl/projection.hpp"
#include "wjl/random.hpp"
#include "wjl/sketch.hpp"

namespace wjl::harness {

namespace detail {

inline bool close_rel(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max({1e-300, std::abs(a), std::abs(b)});
}

inline std::vector<double> uniform_vector(SplitMix64& rng, std::size_t d, double lo, double hi) {
  std::vector<double> v(d);
  for (double& e : v) e = lo + (hi - lo) * uniform_unit(rng);
  return v;
}

/// Reference for the hash: sum_i a_i t^i mod p with 128-bit products and the
/// hardware remainder, no Horner and no Mersenne folding.
inline std::uint64_t naive_poly_mod(const HashPolynomial& h, std::uint64_t t) {
  using u128 = unsigned __int128;
  const u128 p = Mersenne61::modulus;
  u128 acc = 0;
  u128 power = 1;
  for (std::uint64_t a : h.coefficients()) {
    acc = (acc + (static_cast<u128>(a) * power) % p) % p;
    power = (power * t) % p;
  }
  return static_cast<std::uint64_t>(acc);
}

}  // namespace detail

struct VerificationCheck {
  std::string name;
  std::function<bool()> run;
};

/// Oracle-versus-implementation checks, small enough to finish in seconds.
inline std::vector<VerificationCheck> verification_checks(std::uint64_t seed = 20240501) {
  std::vector<VerificationCheck> checks;

  checks.push_back({"exact rho expectation equals weighted norm (d = 1..6)", [seed] {
                      SplitMix64 rng(seed);
                      for (std::size_t d = 1; d <= 6; ++d)
                        for (int rep = 0; rep < 20; ++rep) {
                          const auto x = detail::uniform_vector(rng, d, -1, 1);
                          const auto w = detail::uniform_vector(rng, d, 0, 1);
                          if (!detail::close_rel(exact_rho_expectation(x, w), weighted_sq_norm(x, w), 1e-9))
                            return false;
                        }
                      return true;
                    }});

  checks.push_back({"exact sketch expectation equals weighted norm (d = 1..6)", [seed] {
                      SplitMix64 rng(seed + 1);
                      for (std::size_t d = 1; d <= 6; ++d)
                        for (int rep = 0; rep < 5; ++rep) {
                          const auto x = detail::uniform_vector(rng, d, -1, 1);
                          const auto w = detail::uniform_vector(rng, d, 0, 1);
                          if (!detail::close_rel(exact_sketch_expectation(x, w), weighted_sq_norm(x, w), 1e-9))
                            return false;
                        }
                      return true;
                    }});

  checks.push_back({"projection path averages to the weighted norm over all rows (d = 2)", [] {
                      // Find a seed realizing each of the 16 possible k = 1 rows.
                      const std::vector<double> x = {0.7, -1.3};
                      const std::vector<double> w = {0.4, 2.0};
                      std::vector<double> by_row(16, 0.0);
                      std::vector<bool> seen(16, false);
                      std::size_t found = 0;
                      for (std::uint64_t s = 0; found < 16 && s < 100000; ++s) {
                        const ProjectionMatrix a(2, 1, s);
                        const std::size_t code = a.entry(0, 0).exponent() + 4 * a.entry(0, 1).exponent();
                        if (seen[code]) continue;
                        seen[code] = true;
                        ++found;
                        by_row[code] = rho(reduce(a, x), reduce(a, w));
                      }
                      if (found != 16) return false;
                      double mean = 0.0;
                      for (double v : by_row) mean += v / 16.0;
                      return detail::close_rel(mean, weighted_sq_norm(x, w), 1e-9);
                    }});

  checks.push_back({"rho is exact in one dimension", [seed] {
                      SplitMix64 rng(seed + 2);
                      for (int rep = 0; rep < 100; ++rep) {
                        const double x = -5 + 10 * uniform_unit(rng);
                        const double w = 5 * uniform_unit(rng);
                        const std::size_t k = 1 + uniform_below(rng, 200);
                        const ProjectionMatrix a(1, k, rng());
                        const std::vector<double> xv{x}, wv{w};
                        if (!detail::close_rel(rho(reduce(a, xv), reduce(a, wv)), x * x * w * w, 1e-12)) return false;
                      }
                      return true;
                    }});

  checks.push_back({"pairwise estimate equals estimate of the difference", [seed] {
                      SplitMix64 rng(seed + 3);
                      for (int rep = 0; rep < 20; ++rep) {
                        const auto x = detail::uniform_vector(rng, 50, -1, 1);
                        const auto y = detail::uniform_vector(rng, 50, -1, 1);
                        const auto w = detail::uniform_vector(rng, 50, 0, 1);
                        std::vector<double> diff(50);
                        for (std::size_t i = 0; i < 50; ++i) diff[i] = x[i] - y[i];
                        const ProjectionMatrix a(50, 8, rng());
                        const auto gw = reduce(a, w);
                        const double lhs = rho_pairwise(reduce(a, x), reduce(a, y), gw);
                        const double rhs = rho(reduce(a, diff), gw);
                        if (std::abs(lhs - rhs) > 1e-12 * std::max(1.0, std::abs(rhs))) return false;
                      }
                      return true;
                    }});

  checks.push_back({"sparse and dense reduction agree bit for bit", [seed] {
                      SparseSpec spec;
                      spec.d = 500;
                      spec.l_x = 20;
                      spec.l_w = 20;
                      spec.l_overlap = 10;
                      spec.seed = seed;
                      const auto p = gen_pair(spec);
                      const ProjectionMatrix a(spec.d, 64, seed);
                      const auto sx = to_sparse(p.x());
                      return reduce(a, p.x()) == reduce(a, std::span<const SparseEntry>(sx));
                    }});

  checks.push_back({"Horner evaluation matches the naive field reference", [seed] {
                      SplitMix64 rng(seed + 4);
                      for (int rep = 0; rep < 2000; ++rep) {
                        const auto h = hash_new(rng());
                        const std::uint64_t t = uniform_below(rng, Mersenne61::modulus);
                        if (h.field_value(t) != detail::naive_poly_mod(h, t)) return false;
                      }
                      return true;
                    }});

  checks.push_back({"sketch serialization round-trips", [seed] {
                      StreamSketch s(SketchConfig{3, 4, seed, SketchMode::turnstile});
                      s.update(5, 1.5);
                      s.update(7, -2.25);
                      const auto bytes = s.serialize();
                      return bytes.size() == StreamSketch::serialized_size(3, 4) &&
                             StreamSketch::deserialize(bytes) == s;
                    }});

  return checks;
}

/// Runs every check, printing one PASS/FAIL line each. True when all pass.
inline bool run_verification(std::ostream& os, std::uint64_t seed = 20240501) {
  bool all = true;
  for (const auto& check : verification_checks(seed)) {
    bool ok = false;
    try {
      ok = check.run();
    } catch (const std::exception& e) {
      os << "  error: " << e.what() << '\n';
    }
    os << (ok ? "[PASS] " : "[FAIL] ") << check.name << '\n';
    all = all && ok;
  }
  return all;
}

}  // namespace wjl::harness
