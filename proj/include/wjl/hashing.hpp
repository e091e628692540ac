#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "wjl/core_types.hpp"
#include "wjl/detail/binary_io.hpp"
#include "wjl/error.hpp"
#include "wjl/random.hpp"

namespace wjl {

/// GF(2^61 - 1) with shift-and-add reduction.
struct Mersenne61 {
  static constexpr std::uint64_t modulus = (std::uint64_t{1} << 61) - 1;

  static constexpr std::uint64_t add(std::uint64_t a, std::uint64_t b) noexcept {
    const std::uint64_t s = a + b;
    return s >= modulus ? s - modulus : s;
  }

  static constexpr std::uint64_t mul(std::uint64_t a, std::uint64_t b) noexcept {
    const unsigned __int128 z = static_cast<unsigned __int128>(a) * b;
    const std::uint64_t s = (static_cast<std::uint64_t>(z) & modulus) + static_cast<std::uint64_t>(z >> 61);
    return s >= modulus ? s - modulus : s;
  }
};

/// A degree-7 polynomial with uniformly random coefficients over a prime field.
///
/// Evaluations at any 8 distinct points are independent and uniform over the
/// field. The two low bits of the field value select the output unit. For
/// p = 2^61 - 1 (3 mod 4) residues 0, 1, 2 each cover 2^59 field elements and
/// residue 3 covers 2^59 - 1, a relative bias below 2^-59.
template <class Field>
class BasicHashPolynomial {
 public:
  static constexpr std::size_t kCoefficients = 8;
  static constexpr std::uint64_t modulus = Field::modulus;
  static constexpr std::string_view kMagic = "WJLH";
  static constexpr std::size_t kSerializedSize = 4 + 8 * kCoefficients;

  using Coefficients = std::array<std::uint64_t, kCoefficients>;
  using Powers = std::array<std::uint64_t, kCoefficients>;

  BasicHashPolynomial() = default;

  /// a_0 .. a_7, each required to be below the modulus.
  explicit BasicHashPolynomial(const Coefficients& coefficients) : coefficients_(coefficients) {
    for (std::uint64_t c : coefficients_) {
      if (c >= modulus) throw InvalidArgument("hash polynomial: coefficient not reduced mod p");
    }
  }

  static BasicHashPolynomial from_seed(std::uint64_t seed) {
    SplitMix64 rng(seed);
    Coefficients c{};
    for (auto& a : c) a = uniform_below(rng, modulus);
    return BasicHashPolynomial(c);
  }

  const Coefficients& coefficients() const noexcept { return coefficients_; }

  /// Horner evaluation mod p; t must already be below p.
  std::uint64_t field_value_unchecked(std::uint64_t t) const noexcept {
    std::uint64_t acc = coefficients_[kCoefficients - 1];
    for (std::size_t i = kCoefficients - 1; i-- > 0;) acc = Field::add(Field::mul(acc, t), coefficients_[i]);
    return acc;
  }

  /// 1, t, ..., t^7 mod p, for evaluating many polynomials at one point.
  static Powers powers(std::uint64_t t) {
    check_point(t);
    Powers p{};
    p[0] = 1;
    for (std::size_t i = 1; i < kCoefficients; ++i) p[i] = Field::mul(p[i - 1], t);
    return p;
  }

  /// Same value as field_value_unchecked(t) given powers(t); the products are
  /// independent, so this pipelines better than Horner.
  std::uint64_t field_value_at(const Powers& p) const noexcept {
    std::uint64_t acc = coefficients_[0];
    for (std::size_t i = 1; i < kCoefficients; ++i) acc = Field::add(acc, Field::mul(coefficients_[i], p[i]));
    return acc;
  }

  ComplexUnit eval_at(const Powers& p) const noexcept {
    return ComplexUnit(static_cast<unsigned>(field_value_at(p) & 3u));
  }

  std::uint64_t field_value(std::uint64_t t) const {
    check_point(t);
    return field_value_unchecked(t);
  }

  ComplexUnit eval_unchecked(std::uint64_t t) const noexcept {
    return ComplexUnit(static_cast<unsigned>(field_value_unchecked(t) & 3u));
  }

  ComplexUnit eval(std::uint64_t t) const {
    check_point(t);
    return eval_unchecked(t);
  }

  static void check_point(std::uint64_t t) {
    if (t >= modulus) throw InvalidArgument("hash polynomial: point " + std::to_string(t) + " is not below p");
  }

  void serialize_to(detail::ByteWriter& out) const {
    out.magic(kMagic);
    for (std::uint64_t c : coefficients_) out.u64(c);
  }

  std::string serialize() const {
    detail::ByteWriter out;
    serialize_to(out);
    return std::move(out).bytes();
  }

  static BasicHashPolynomial deserialize_from(detail::ByteReader& in) {
    in.expect_magic(kMagic);
    Coefficients c{};
    for (auto& a : c) a = in.u64();
    try {
      return BasicHashPolynomial(c);
    } catch (const InvalidArgument& e) {
      throw FormatError(e.what());
    }
  }

  static BasicHashPolynomial deserialize(std::string_view bytes) {
    detail::ByteReader in(bytes);
    auto h = deserialize_from(in);
    in.expect_end();
    return h;
  }

  friend bool operator==(const BasicHashPolynomial&, const BasicHashPolynomial&) = default;

 private:
  Coefficients coefficients_{};
};

using HashPolynomial = BasicHashPolynomial<Mersenne61>;

inline HashPolynomial hash_new(std::uint64_t seed) { return HashPolynomial::from_seed(seed); }

inline ComplexUnit hash_eval(const HashPolynomial& h, std::uint64_t t) { return h.eval(t); }

/// A hash given by an explicit value table, t -> table[t].
///
/// Lets tests and the exact-expectation oracle drive a sketch through every
/// joint hash outcome.
class TableHash {
 public:
  TableHash() = default;
  explicit TableHash(std::vector<ComplexUnit> table) : table_(std::move(table)) {}

  ComplexUnit eval_unchecked(std::uint64_t t) const noexcept { return table_[t]; }

  ComplexUnit eval(std::uint64_t t) const {
    check_point(t);
    return table_[t];
  }

  void check_point(std::uint64_t t) const {
    if (t >= table_.size()) throw InvalidArgument("table hash: point " + std::to_string(t) + " outside table");
  }

  std::span<const ComplexUnit> table() const noexcept { return table_; }

  friend bool operator==(const TableHash&, const TableHash&) = default;

 private:
  std::vector<ComplexUnit> table_;
};

}  // namespace wjl
