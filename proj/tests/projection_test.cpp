#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <map>
#include <numbers>
#include <sstream>
#include <vector>

#include "wjl/harness/stats.hpp"
#include "wjl/projection.hpp"
#include "wjl/random.hpp"

namespace wjl {
namespace {

std::vector<double> random_vector(SplitMix64& rng, std::size_t d, double lo, double hi) {
  std::vector<double> v(d);
  for (double& e : v) e = lo + (hi - lo) * uniform_unit(rng);
  return v;
}

/// For each of the 4^d possible k = 1 rows, some seed whose matrix has that row.
/// Lets the brute-force expectations run through sample_matrix + reduce + rho.
std::vector<std::uint64_t> seed_per_row(std::size_t d) {
  const std::size_t rows = std::size_t{1} << (2 * d);
  std::vector<std::uint64_t> seeds(rows);
  std::vector<bool> seen(rows, false);
  std::size_t found = 0;
  for (std::uint64_t s = 0; found < rows; ++s) {
    const ProjectionMatrix a(d, 1, s);
    std::size_t code = 0;
    for (std::size_t j = 0; j < d; ++j) code |= std::size_t{a.entry(0, j).exponent()} << (2 * j);
    if (!seen[code]) {
      seen[code] = true;
      seeds[code] = s;
      ++found;
    }
  }
  return seeds;
}

double mean_rho_over_all_rows(const std::vector<double>& x, const std::vector<double>& w) {
  const auto seeds = seed_per_row(x.size());
  double sum = 0.0;
  for (std::uint64_t s : seeds) {
    const ProjectionMatrix a(x.size(), 1, s);
    sum += rho(reduce(a, x), reduce(a, w));
  }
  return sum / static_cast<double>(seeds.size());
}

TEST(SampleMatrix, RejectsZeroDimensions) {
  EXPECT_THROW(sample_matrix(0, 2, 1), InvalidArgument);
  EXPECT_THROW(sample_matrix(3, 0, 1), InvalidArgument);
}

TEST(SampleMatrix, Deterministic) {
  const auto a = sample_matrix(3, 2, 42);
  const auto b = sample_matrix(3, 2, 42);
  EXPECT_EQ(a, b);
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(a.entry(i, j), b.entry(i, j));
}

TEST(SampleMatrix, UniformOverUnits) {
  const auto a = sample_matrix(1000000, 1, 7);
  std::array<std::size_t, 4> counts{};
  for (std::size_t j = 0; j < a.d(); ++j) ++counts[a.entry(0, j).exponent()];
  for (std::size_t c : counts) {
    const double f = static_cast<double>(c) / 1e6;
    EXPECT_GE(f, 0.245);
    EXPECT_LE(f, 0.255);
  }
}

TEST(SampleMatrix, SeedsCoverEveryUnit) {
  std::array<bool, 4> seen{};
  for (std::uint64_t s = 0; s < 64; ++s) seen[sample_matrix(1, 1, s).entry(0, 0).exponent()] = true;
  for (bool b : seen) EXPECT_TRUE(b);
}

TEST(SampleMatrix, PackedRowMatchesEntries) {
  const auto a = sample_matrix(70, 3, 9);
  std::vector<std::uint64_t> words(a.words_per_row());
  for (std::size_t i = 0; i < a.k(); ++i) {
    a.packed_row(i, words);
    for (std::size_t j = 0; j < a.d(); ++j)
      EXPECT_EQ((words[j / 32] >> (2 * (j % 32))) & 3u, a.entry(i, j).exponent());
    EXPECT_EQ(words.back() >> (2 * (70 % 32)), 0u);
  }
}

TEST(Reduce, BasisVectorSelectsColumn) {
  const auto a = sample_matrix(5, 16, 3);
  std::vector<double> e1(5, 0.0);
  e1[0] = 1.0;
  const auto g = reduce(a, e1);
  ASSERT_EQ(g.k(), 16u);
  for (std::size_t i = 0; i < 16; ++i) EXPECT_EQ(g.values()[i], a.entry(i, 0).to_complex() / 4.0);
}

TEST(Reduce, ZeroVector) {
  const auto a = sample_matrix(40, 8, 3);
  const auto g = reduce(a, std::vector<double>(40, 0.0));
  for (const auto& z : g.values()) EXPECT_EQ(z, Complex(0, 0));
}

TEST(Reduce, Additive) {
  SplitMix64 rng(5);
  const auto a = sample_matrix(100, 16, 77);
  const auto x = random_vector(rng, 100, -1, 1);
  const auto y = random_vector(rng, 100, -1, 1);
  std::vector<double> s(100);
  for (std::size_t i = 0; i < 100; ++i) s[i] = x[i] + y[i];
  const auto lhs = reduce(a, s);
  const auto rhs = reduce(a, x) + reduce(a, y);
  for (std::size_t i = 0; i < 16; ++i) EXPECT_LE(std::abs(lhs.values()[i] - rhs.values()[i]), 1e-12);
}

TEST(Reduce, LinearInScalars) {
  SplitMix64 rng(6);
  const auto a = sample_matrix(100, 16, 78);
  const auto x = random_vector(rng, 100, -1, 1);
  const auto y = random_vector(rng, 100, -1, 1);
  const auto gx = reduce(a, x);
  const auto gy = reduce(a, y);
  for (double alpha : {-1.0, 0.5, 3.0}) {
    for (double beta : {-1.0, 0.5, 3.0}) {
      std::vector<double> c(100);
      for (std::size_t i = 0; i < 100; ++i) c[i] = alpha * x[i] + beta * y[i];
      const auto gc = reduce(a, c);
      for (std::size_t i = 0; i < 16; ++i)
        EXPECT_LE(std::abs(gc.values()[i] - (alpha * gx.values()[i] + beta * gy.values()[i])), 1e-12);
    }
  }
}

TEST(Reduce, SparseMatchesDenseBitForBit) {
  SplitMix64 rng(8);
  const auto a = sample_matrix(300, 32, 5);
  std::vector<double> x(300, 0.0);
  std::vector<SparseEntry> sparse;
  for (std::size_t i = 0; i < 300; i += 7) {
    x[i] = uniform_unit(rng) - 0.5;
    sparse.push_back({i, x[i]});
  }
  EXPECT_EQ(reduce(a, x), reduce(a, std::span<const SparseEntry>(sparse)));
}

TEST(Reduce, DimensionErrors) {
  const auto a = sample_matrix(4, 2, 1);
  EXPECT_THROW(reduce(a, std::vector<double>(5, 1.0)), DimensionMismatch);
  const std::vector<SparseEntry> bad = {{4, 1.0}};
  EXPECT_THROW(reduce(a, std::span<const SparseEntry>(bad)), DimensionMismatch);
}

TEST(Rho, OneDimensionIsExact) {
  const std::vector<double> x{3.0}, w{2.0};
  for (std::size_t k : {1, 4, 16, 64}) {
    for (std::uint64_t seed = 0; seed < 8; ++seed) {
      const auto a = sample_matrix(1, k, seed);
      EXPECT_EQ(rho(reduce(a, x), reduce(a, w)), 36.0) << "k=" << k;
    }
  }
  for (std::size_t k : {3, 7, 100, 999}) {
    const auto a = sample_matrix(1, k, k);
    EXPECT_NEAR(rho(reduce(a, x), reduce(a, w)), 36.0, 36.0 * 1e-12) << "k=" << k;
  }
}

TEST(Rho, MeanOverAllRowsTwoDims) {
  EXPECT_NEAR(mean_rho_over_all_rows({1, 1}, {1, 1}), 2.0, 1e-12);
}

TEST(Rho, MeanOverAllRowsDisjointSupports) {
  EXPECT_NEAR(mean_rho_over_all_rows({1.5, -2, 0, 0}, {0, 0, 3, 1}), 0.0, 1e-12);
}

TEST(Rho, UnbiasedByEnumeration) {
  SplitMix64 rng(21);
  for (std::size_t d = 1; d <= 6; ++d) {
    const auto x = random_vector(rng, d, -1, 1);
    const auto w = random_vector(rng, d, 0, 1);
    const double truth = weighted_sq_norm(x, w);
    EXPECT_NEAR(mean_rho_over_all_rows(x, w), truth, 1e-9 * truth) << "d=" << d;
  }
}

TEST(Rho, MonteCarloUnbiased) {
  SplitMix64 rng(22);
  const auto x = random_vector(rng, 200, -1, 1);
  const auto w = random_vector(rng, 200, 0, 1);
  std::vector<double> est;
  for (std::uint64_t s = 0; s < 4000; ++s) {
    const auto a = sample_matrix(200, 16, s);
    est.push_back(rho(reduce(a, x), reduce(a, w)));
  }
  const auto sum = harness::summarize(est);
  EXPECT_LE(std::abs(sum.mean - weighted_sq_norm(x, w)), 4 * sum.standard_error());
}

TEST(Rho, ScaleEquivariance) {
  SplitMix64 rng(23);
  const auto a = sample_matrix(60, 12, 4);
  const auto x = random_vector(rng, 60, -1, 1);
  const auto w = random_vector(rng, 60, 0, 1);
  const auto gw = reduce(a, w);
  const double base = rho(reduce(a, x), gw);
  for (double alpha : {-2.0, 0.1, 7.0}) {
    std::vector<double> ax(x);
    for (double& v : ax) v *= alpha;
    EXPECT_NEAR(rho(reduce(a, ax), gw), alpha * alpha * base, 1e-12 * std::max(1.0, std::abs(alpha * alpha * base)));
  }
}

TEST(Rho, CanBeNegative) {
  // Some realization must undershoot zero for a pair with zero weighted norm.
  const std::vector<double> x{1, 0, 1, 0}, w{0, 1, 0, 1};
  bool negative = false;
  for (std::uint64_t s = 0; s < 200 && !negative; ++s) {
    const auto a = sample_matrix(4, 1, s);
    negative = rho(reduce(a, x), reduce(a, w)) < 0.0;
  }
  EXPECT_TRUE(negative);
}

TEST(Rho, ProvenanceMismatch) {
  const std::vector<double> x{1, 2, 3};
  const auto g = reduce(sample_matrix(3, 4, 1), x);
  EXPECT_THROW(rho(g, reduce(sample_matrix(3, 4, 2), x)), ProvenanceMismatch);
  EXPECT_THROW(rho(g, reduce(sample_matrix(3, 5, 1), x)), ProvenanceMismatch);
  EXPECT_THROW(rho(g, reduce(sample_matrix(4, 4, 1), std::vector<double>{1, 2, 3, 4})), ProvenanceMismatch);
  EXPECT_THROW(rho_pairwise(g, g, reduce(sample_matrix(3, 4, 2), x)), ProvenanceMismatch);
}

TEST(RhoPairwise, IdenticalInputsGiveZero) {
  const auto a = sample_matrix(10, 8, 3);
  SplitMix64 rng(3);
  const auto gx = reduce(a, random_vector(rng, 10, -1, 1));
  const auto gw = reduce(a, random_vector(rng, 10, 0, 1));
  EXPECT_EQ(rho_pairwise(gx, gx, gw), 0.0);
}

TEST(RhoPairwise, MatchesReductionOfDifference) {
  SplitMix64 rng(31);
  for (int rep = 0; rep < 20; ++rep) {
    const auto a = sample_matrix(50, 8, rng());
    const auto x = random_vector(rng, 50, -1, 1);
    const auto y = random_vector(rng, 50, -1, 1);
    const auto w = random_vector(rng, 50, 0, 1);
    std::vector<double> diff(50);
    for (std::size_t i = 0; i < 50; ++i) diff[i] = x[i] - y[i];
    const auto gw = reduce(a, w);
    const double expected = rho(reduce(a, diff), gw);
    EXPECT_NEAR(rho_pairwise(reduce(a, x), reduce(a, y), gw), expected, 1e-12 * std::max(1.0, std::abs(expected)));
  }
}

TEST(RhoPairwise, OneDimension) {
  const auto a = sample_matrix(1, 1, 5);
  EXPECT_EQ(rho_pairwise(reduce(a, std::vector<double>{5}), reduce(a, std::vector<double>{2}),
                         reduce(a, std::vector<double>{3})),
            81.0);
}

TEST(RequiredK, Examples) {
  EXPECT_EQ(required_k({1.0, 1.0 / std::numbers::e, 1.0, 1.0}), 1u);
  EXPECT_EQ(required_k({0.5, 1.0 / std::numbers::e, 2.0, 1.0}), 64u);
  EXPECT_EQ(PlanParams{}.c, 576.0);
}

TEST(RequiredK, HalvingEpsilonQuadruples) {
  for (double eps : {0.8, 0.4, 0.2}) {
    for (double dist : {1.0, 1.5, 3.0}) {
      for (double c : {1.0, 576.0}) {
        // ceil(4v) lies in [4 ceil(v) - 3, 4 ceil(v)], with equality when v is an integer.
        const PlanParams p{eps, 1.0 / std::numbers::e, dist, c};
        const PlanParams half{eps / 2, p.delta, dist, c};
        const double raw = c * std::pow(dist, 4) / (eps * eps);
        if (std::abs(raw - std::round(raw)) < 1e-9) {
          EXPECT_EQ(required_k(half), 4 * required_k(p));
        }
        EXPECT_GE(required_k(half), 4 * required_k(p) - 3);
        EXPECT_LE(required_k(half), 4 * required_k(p));
      }
    }
  }
}

TEST(RequiredK, RejectsBadParams) {
  EXPECT_THROW(required_k({0.0, 0.1, 1.0, 1.0}), InvalidArgument);
  EXPECT_THROW(required_k({0.5, 1.0, 1.0, 1.0}), InvalidArgument);
  EXPECT_THROW(required_k({0.5, 0.1, 0.0, 1.0}), InvalidArgument);
  EXPECT_THROW(required_k({0.5, 0.1, 1.0, -1.0}), InvalidArgument);
}

TEST(HoeffdingK, Examples) {
  const double delta = 2.0 / std::numbers::e;
  EXPECT_EQ(hoeffding_k(std::vector<double>{1}, std::vector<double>{1}, 1.0, delta), 1u);
  // (||x||_1 ||w||_1 / ||x||_w)^4 = (2 * 2 / sqrt 2)^4 = 64.
  EXPECT_EQ(hoeffding_k(std::vector<double>{1, 1}, std::vector<double>{1, 1}, 1.0, delta), 64u);
}

TEST(HoeffdingK, OneSparseRatioToRequiredK) {
  const std::vector<double> x{0, -2.5, 0}, w{0, 0.7, 0};
  for (double delta : {0.01, 0.1, 0.3}) {
    const double eps = 0.01;
    const double c = 2.0;
    const double h = static_cast<double>(hoeffding_k(x, w, eps, delta));
    const double r = static_cast<double>(required_k({eps, delta, 1.0, c}));
    const double expected = std::log(2.0 / delta) / (c * std::log(1.0 / delta));
    EXPECT_NEAR(h / r, expected, 1e-3 * expected);
  }
}

TEST(HoeffdingK, ZeroWeightedNorm) {
  EXPECT_THROW(hoeffding_k(std::vector<double>{1, 0}, std::vector<double>{0, 1}, 0.5, 0.1), InvalidArgument);
}

TEST(ReducedVectorFormat, BinaryLayout) {
  const ReducedVector g({Complex(1.5, -2.0), Complex(0.0, 3.25)}, 0x0102030405060708ULL, 9);
  const std::string bytes = g.serialize();
  ASSERT_EQ(bytes.size(), 4u + 2 + 4 + 4 + 8 + 2 * 16);
  EXPECT_EQ(bytes.substr(0, 4), "WJLR");
  EXPECT_EQ(static_cast<unsigned char>(bytes[4]), 1u);  // version, little-endian
  EXPECT_EQ(static_cast<unsigned char>(bytes[5]), 0u);
  EXPECT_EQ(static_cast<unsigned char>(bytes[6]), 2u);  // k
  EXPECT_EQ(static_cast<unsigned char>(bytes[10]), 9u);  // d
  EXPECT_EQ(static_cast<unsigned char>(bytes[14]), 0x08u);  // seed, lowest byte first
  EXPECT_EQ(static_cast<unsigned char>(bytes[21]), 0x01u);
  EXPECT_EQ(ReducedVector::deserialize(bytes), g);
}

TEST(ReducedVectorFormat, RoundTripRandom) {
  SplitMix64 rng(40);
  for (int rep = 0; rep < 20; ++rep) {
    const std::size_t d = 1 + uniform_below(rng, 300);
    const auto a = sample_matrix(d, 1 + uniform_below(rng, 40), rng());
    const auto g = reduce(a, random_vector(rng, d, -10, 10));
    EXPECT_EQ(ReducedVector::deserialize(g.serialize()), g);
  }
}

TEST(ReducedVectorFormat, RejectsCorruptInput) {
  const ReducedVector g({Complex(1, 2)}, 3, 4);
  std::string bytes = g.serialize();
  EXPECT_THROW(ReducedVector::deserialize(bytes.substr(0, bytes.size() - 1)), FormatError);
  std::string bad = bytes;
  bad[0] = 'X';
  EXPECT_THROW(ReducedVector::deserialize(bad), FormatError);
  bad = bytes;
  bad[4] = 7;
  EXPECT_THROW(ReducedVector::deserialize(bad), FormatError);
}

TEST(ReducedVectorFormat, CsvExport) {
  const ReducedVector g({Complex(0.1, -2), Complex(0, 3.5)}, 1, 2);
  std::ostringstream os;
  g.write_csv(os);
  EXPECT_EQ(os.str(), "index,re,im\n0,0.1,-2\n1,0,3.5\n");
}

}  // namespace
}  // namespace wjl
