#include <gtest/gtest.h>

#include <array>
#include <boost/math/distributions/chi_squared.hpp>
#include <boost/multiprecision/cpp_int.hpp>
#include <cmath>
#include <set>
#include <vector>

#include "wjl/hashing.hpp"
#include "wjl/random.hpp"

namespace wjl {
namespace {

/// GF(17) for exhaustive-style independence checks.
struct Field17 {
  static constexpr std::uint64_t modulus = 17;
  static constexpr std::uint64_t add(std::uint64_t a, std::uint64_t b) { return (a + b) % modulus; }
  static constexpr std::uint64_t mul(std::uint64_t a, std::uint64_t b) { return (a * b) % modulus; }
};

double chi_square_critical(double dof, double alpha) {
  return boost::math::quantile(boost::math::complement(boost::math::chi_squared(dof), alpha));
}

TEST(HashNew, Deterministic) { EXPECT_EQ(hash_new(123), hash_new(123)); }

TEST(HashNew, DistinctAcrossSeeds) {
  std::set<HashPolynomial::Coefficients> seen;
  for (std::uint64_t s = 0; s < 10000; ++s) seen.insert(hash_new(s).coefficients());
  EXPECT_EQ(seen.size(), 10000u);
}

TEST(HashNew, CoefficientsReducedAndCentered) {
  long double sum = 0;
  std::size_t n = 0;
  for (std::uint64_t s = 0; s < 100000; ++s) {
    for (std::uint64_t c : hash_new(s).coefficients()) {
      ASSERT_LT(c, Mersenne61::modulus);
      sum += static_cast<long double>(c);
      ++n;
    }
  }
  const long double half = static_cast<long double>(Mersenne61::modulus) / 2;
  EXPECT_LE(std::abs(sum / n - half), 0.01L * half);
}

TEST(HashEval, ConstantPolynomial) {
  const HashPolynomial h({6, 0, 0, 0, 0, 0, 0, 0});
  for (std::uint64_t t : {0ULL, 1ULL, 99ULL, 123456789ULL}) EXPECT_EQ(hash_eval(h, t), ComplexUnit::minus_one());
}

TEST(HashEval, LinearPolynomialExposesLowBits) {
  const HashPolynomial h({0, 1, 0, 0, 0, 0, 0, 0});
  for (unsigned t = 0; t < 4; ++t) EXPECT_EQ(hash_eval(h, t).exponent(), t);
}

TEST(HashEval, RejectsPointsOutsideField) {
  const auto h = hash_new(1);
  EXPECT_THROW(hash_eval(h, Mersenne61::modulus), InvalidArgument);
  EXPECT_NO_THROW(hash_eval(h, Mersenne61::modulus - 1));
}

TEST(HashPolynomialTest, RejectsUnreducedCoefficients) {
  EXPECT_THROW(HashPolynomial({Mersenne61::modulus, 0, 0, 0, 0, 0, 0, 0}), InvalidArgument);
}

TEST(HashEval, MomentsOverConsecutivePoints) {
  const auto h = hash_new(2024);
  constexpr std::size_t n = 1000000;
  std::array<std::size_t, 4> counts{};
  Complex m1, m2, m3;
  double m4 = 0.0;
  for (std::uint64_t t = 1; t <= n; ++t) {
    const ComplexUnit u = hash_eval(h, t);
    ++counts[u.exponent()];
    m1 += u.to_complex();
    m2 += (u * u).to_complex();
    m3 += (u * u * u).to_complex();
    m4 += (u * u * u * u).to_complex().real();
  }
  for (std::size_t c : counts) {
    EXPECT_GE(static_cast<double>(c) / n, 0.2485);
    EXPECT_LE(static_cast<double>(c) / n, 0.2515);
  }
  EXPECT_LT(std::abs(m1) / n, 0.005);
  EXPECT_LT(std::abs(m2) / n, 0.005);
  EXPECT_LT(std::abs(m3) / n, 0.005);
  EXPECT_EQ(m4 / n, 1.0);
}

TEST(HashEval, MatchesWideIntegerReference) {
  using boost::multiprecision::cpp_int;
  SplitMix64 rng(99);
  const cpp_int p = Mersenne61::modulus;
  for (int rep = 0; rep < 10000; ++rep) {
    const auto h = hash_new(rng());
    const std::uint64_t t = uniform_below(rng, Mersenne61::modulus);
    cpp_int acc = 0;
    cpp_int power = 1;
    for (std::uint64_t a : h.coefficients()) {
      acc += cpp_int(a) * power;
      power *= t;
    }
    const auto expected = static_cast<std::uint64_t>(acc % p);
    ASSERT_EQ(h.field_value(t), expected) << "rep " << rep;
    ASSERT_EQ(hash_eval(h, t).exponent(), expected & 3u);
  }
}

TEST(HashEval, PowersPathMatchesHorner) {
  SplitMix64 rng(77);
  for (int rep = 0; rep < 10000; ++rep) {
    const auto h = hash_new(rng());
    const std::uint64_t t = rep < 3 ? std::uint64_t(rep) : uniform_below(rng, Mersenne61::modulus);
    EXPECT_EQ(h.field_value_at(HashPolynomial::powers(t)), h.field_value(t));
  }
  using SmallHash = BasicHashPolynomial<Field17>;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto h = SmallHash::from_seed(seed);
    for (std::uint64_t t = 0; t < 17; ++t) EXPECT_EQ(h.field_value_at(SmallHash::powers(t)), h.field_value(t));
  }
  EXPECT_THROW(HashPolynomial::powers(Mersenne61::modulus), InvalidArgument);
}

TEST(HashIndependence, EightPointsJointlyUniformMersenne) {
  constexpr std::size_t kSamples = 1000000;
  constexpr std::size_t kCells = 1 << 16;
  const std::array<std::uint64_t, 8> points = {1, 2, 3, 5, 8, 13, 21, 34};
  std::vector<std::uint32_t> counts(kCells, 0);
  for (std::uint64_t s = 0; s < kSamples; ++s) {
    const auto h = hash_new(mix_seed(777, s));
    std::size_t code = 0;
    for (std::size_t i = 0; i < 8; ++i) code |= std::size_t{hash_eval(h, points[i]).exponent()} << (2 * i);
    ++counts[code];
  }
  const double expected = static_cast<double>(kSamples) / kCells;
  double chi2 = 0.0;
  for (auto c : counts) chi2 += (c - expected) * (c - expected) / expected;
  EXPECT_LT(chi2, chi_square_critical(kCells - 1, 1e-3));
}

TEST(HashIndependence, EightPointsMatchProductLawSmallField) {
  // In GF(17) residue 0 has five preimages (0, 4, 8, 12, 16) and the others
  // four, so the target is the product of those marginals, not uniform.
  using SmallHash = BasicHashPolynomial<Field17>;
  constexpr std::size_t kSamples = 1000000;
  constexpr std::size_t kCells = 1 << 16;
  const std::array<double, 4> marginal = {5.0 / 17, 4.0 / 17, 4.0 / 17, 4.0 / 17};
  const std::array<std::uint64_t, 8> points = {0, 1, 2, 3, 7, 9, 11, 16};
  std::vector<std::uint32_t> counts(kCells, 0);
  for (std::uint64_t s = 0; s < kSamples; ++s) {
    const auto h = SmallHash::from_seed(mix_seed(778, s));
    std::size_t code = 0;
    for (std::size_t i = 0; i < 8; ++i) code |= std::size_t{h.eval(points[i]).exponent()} << (2 * i);
    ++counts[code];
  }
  double chi2 = 0.0;
  for (std::size_t code = 0; code < kCells; ++code) {
    double p = 1.0;
    for (std::size_t i = 0; i < 8; ++i) p *= marginal[(code >> (2 * i)) & 3u];
    const double expected = p * kSamples;
    chi2 += (counts[code] - expected) * (counts[code] - expected) / expected;
  }
  EXPECT_LT(chi2, chi_square_critical(kCells - 1, 1e-3));
}

TEST(HashPolynomialFormat, RoundTripAndLayout) {
  const auto h = hash_new(5);
  const std::string bytes = h.serialize();
  ASSERT_EQ(bytes.size(), HashPolynomial::kSerializedSize);
  EXPECT_EQ(bytes.size(), 68u);
  EXPECT_EQ(bytes.substr(0, 4), "WJLH");
  EXPECT_EQ(HashPolynomial::deserialize(bytes), h);
  std::string bad = bytes;
  bad[11] = static_cast<char>(0xFF);  // top byte of a0 -> not below p
  EXPECT_THROW(HashPolynomial::deserialize(bad), FormatError);
  EXPECT_THROW(HashPolynomial::deserialize(bytes.substr(0, 20)), FormatError);
}

TEST(TableHashTest, ReturnsForcedValues) {
  const TableHash h({ComplexUnit(3), ComplexUnit(1)});
  EXPECT_EQ(h.eval(0), ComplexUnit(3));
  EXPECT_EQ(h.eval(1), ComplexUnit(1));
  EXPECT_THROW(h.eval(2), InvalidArgument);
}

}  // namespace
}  // namespace wjl
