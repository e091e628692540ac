#pragma once

#include <bit>
#include <complex>
#include <cstdint>

namespace wjl {

using Complex = std::complex<double>;

/// A fourth root of unity, stored as the exponent e of i^e.
///
/// 0 -> 1, 1 -> i, 2 -> -1, 3 -> -i. This is the entry alphabet of the
/// projection matrix and the output alphabet of the sketch hashes.
class ComplexUnit {
 public:
  constexpr ComplexUnit() noexcept = default;
  constexpr explicit ComplexUnit(unsigned exponent) noexcept
      : exponent_(static_cast<std::uint8_t>(exponent & 3u)) {}

  static constexpr ComplexUnit one() noexcept { return ComplexUnit(0); }
  static constexpr ComplexUnit i() noexcept { return ComplexUnit(1); }
  static constexpr ComplexUnit minus_one() noexcept { return ComplexUnit(2); }
  static constexpr ComplexUnit minus_i() noexcept { return ComplexUnit(3); }

  constexpr unsigned exponent() const noexcept { return exponent_; }

  Complex to_complex() const noexcept {
    constexpr double re[4] = {1.0, 0.0, -1.0, 0.0};
    constexpr double im[4] = {0.0, 1.0, 0.0, -1.0};
    return {re[exponent_], im[exponent_]};
  }

  friend constexpr bool operator==(ComplexUnit, ComplexUnit) noexcept = default;

 private:
  std::uint8_t exponent_ = 0;
};

/// i^a * i^b = i^((a+b) mod 4).
constexpr ComplexUnit unit_mul(ComplexUnit a, ComplexUnit b) noexcept {
  return ComplexUnit(a.exponent() + b.exponent());
}

constexpr ComplexUnit operator*(ComplexUnit a, ComplexUnit b) noexcept { return unit_mul(a, b); }

/// Inverse of ComplexUnit::to_complex for the four exact unit values.
/// Returns false when z is not exactly one of them.
inline bool complex_to_unit(Complex z, ComplexUnit& out) noexcept {
  for (unsigned e = 0; e < 4; ++e) {
    if (ComplexUnit(e).to_complex() == z) {
      out = ComplexUnit(e);
      return true;
    }
  }
  return false;
}

namespace detail {

/// Adds `s` (exponent bit 1 clear) or `-s` (set) to the real (bit 0 clear) or
/// imaginary (set) component of `parts`. No branches, no multiply.
inline void unit_add(double (&parts)[2], unsigned exponent, double s) noexcept {
  const auto sign = static_cast<std::uint64_t>((exponent >> 1) & 1u) << 63;
  parts[exponent & 1u] += std::bit_cast<double>(std::bit_cast<std::uint64_t>(s) ^ sign);
}

}  // namespace detail

/// acc + s*u, computed as a signed add into one component.
inline Complex unit_axpy(Complex acc, ComplexUnit u, double s) noexcept {
  double parts[2] = {acc.real(), acc.imag()};
  detail::unit_add(parts, u.exponent(), s);
  return {parts[0], parts[1]};
}

}  // namespace wjl
