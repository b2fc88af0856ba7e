#pragma once

#include <cmath>
#include <complex>

#include "nilsym/errors.hpp"

namespace nilsym {

using cplx = std::complex<double>;

inline constexpr cplx kI{0.0, 1.0};

/// 2x2 complex matrix, row-major entries m11 m12 / m21 m22.
struct Mat2C {
  cplx m11{}, m12{}, m21{}, m22{};

  static constexpr Mat2C zero() { return {}; }
  static constexpr Mat2C identity() { return {1.0, 0.0, 0.0, 1.0}; }

  cplx trace() const { return m11 + m22; }
  cplx det() const { return m11 * m22 - m12 * m21; }

  /// Diagonal part; off-diagonal entries zeroed.
  Mat2C diag() const { return {m11, 0.0, 0.0, m22}; }
  /// Off-diagonal part; diagonal entries zeroed.
  Mat2C offdiag() const { return {0.0, m12, m21, 0.0}; }

  Mat2C adjoint() const { return {std::conj(m11), std::conj(m21), std::conj(m12), std::conj(m22)}; }

  Mat2C inverse() const {
    const cplx d = det();
    const double scale = max_abs() * max_abs();
    if (d == 0.0 || std::abs(d) <= 1e-14 * scale) throw SingularFrame("Mat2C::inverse: singular matrix");
    return {m22 / d, -m12 / d, -m21 / d, m11 / d};
  }

  double max_abs() const {
    return std::max(std::max(std::abs(m11), std::abs(m12)), std::max(std::abs(m21), std::abs(m22)));
  }

  Mat2C& operator+=(const Mat2C& o) {
    m11 += o.m11; m12 += o.m12; m21 += o.m21; m22 += o.m22;
    return *this;
  }
  Mat2C& operator-=(const Mat2C& o) {
    m11 -= o.m11; m12 -= o.m12; m21 -= o.m21; m22 -= o.m22;
    return *this;
  }
  Mat2C& operator*=(cplx s) {
    m11 *= s; m12 *= s; m21 *= s; m22 *= s;
    return *this;
  }

  friend Mat2C operator+(Mat2C a, const Mat2C& b) { return a += b; }
  friend Mat2C operator-(Mat2C a, const Mat2C& b) { return a -= b; }
  friend Mat2C operator-(const Mat2C& a) { return {-a.m11, -a.m12, -a.m21, -a.m22}; }
  friend Mat2C operator*(Mat2C a, cplx s) { return a *= s; }
  friend Mat2C operator*(cplx s, Mat2C a) { return a *= s; }
  friend Mat2C operator*(Mat2C a, double s) { return a *= cplx(s); }
  friend Mat2C operator*(double s, Mat2C a) { return a *= cplx(s); }
  friend Mat2C operator/(Mat2C a, double s) { return a *= cplx(1.0 / s); }

  friend Mat2C operator*(const Mat2C& a, const Mat2C& b) {
    return {a.m11 * b.m11 + a.m12 * b.m21, a.m11 * b.m12 + a.m12 * b.m22,
            a.m21 * b.m11 + a.m22 * b.m21, a.m21 * b.m12 + a.m22 * b.m22};
  }

  friend bool operator==(const Mat2C&, const Mat2C&) = default;
};

inline Mat2C commutator(const Mat2C& a, const Mat2C& b) { return a * b - b * a; }

/// Largest entrywise modulus of a - b.
inline double max_abs_diff(const Mat2C& a, const Mat2C& b) { return (a - b).max_abs(); }

/// Constant matrices of the matrix model; x1 s1 + x2 s2 + x3 s3 represents (x1, x2, x3).
namespace sigma {
inline constexpr Mat2C s0{kI, 0.0, 0.0, -kI};
inline constexpr Mat2C s1{0.0, 1.0, 1.0, 0.0};
inline constexpr Mat2C s2{0.0, kI, -kI, 0.0};
inline constexpr Mat2C s3{1.0, 0.0, 0.0, 1.0};
}  // namespace sigma

}  // namespace nilsym
