#pragma once

// Geometry of the Heisenberg group Nil3 = (R^3, dx1^2 + dx2^2 + (x2 dx1/2 - x1 dx2/2 + dx3)^2).
//
// Tangent vectors are stored by their coefficients on the left-invariant
// orthonormal frame E1 = d1 - x2/2 d3, E2 = d2 + x1/2 d3, E3 = d3. Coordinate
// components are only used at the boundary (metric in coordinates, frame
// expressions, left translation). Coefficients may be complex so that
// complexified vectors such as f_z are handled by the same code.

#include <array>
#include <cmath>
#include <complex>
#include <stdexcept>

#include "nilsym/errors.hpp"
#include "nilsym/mat2c.hpp"

namespace nilsym::nil3 {

struct Nil3Point {
  double x1 = 0.0, x2 = 0.0, x3 = 0.0;

  bool finite() const { return std::isfinite(x1) && std::isfinite(x2) && std::isfinite(x3); }
  friend bool operator==(const Nil3Point&, const Nil3Point&) = default;
};

template <class T>
using Vec3 = std::array<T, 3>;

/// Components (v1, v2, v3) on the coordinate basis d1, d2, d3.
template <class T = double>
using CoordVec = Vec3<T>;

/// Coefficients (a1, a2, a3) on the canonical frame (E1, E2, E3).
template <class T = double>
using FrameCoeffs = Vec3<T>;

template <class T = double>
struct TangentVec {
  Nil3Point base;
  FrameCoeffs<T> coeff{};

  /// Squared norm; for complex coefficients this is the bilinear square a.a.
  T norm2() const { return coeff[0] * coeff[0] + coeff[1] * coeff[1] + coeff[2] * coeff[2]; }
};

/// The one-form x2/2 dx1 - x1/2 dx2 + dx3 evaluated on a coordinate vector.
template <class T>
T vertical_form(const Nil3Point& p, const CoordVec<T>& v) {
  return 0.5 * p.x2 * v[0] - 0.5 * p.x1 * v[1] + v[2];
}

/// Metric in coordinates; the complex instantiation is the bilinear extension.
template <class T>
T metric_at(const Nil3Point& p, const CoordVec<T>& u, const CoordVec<T>& v) {
  return u[0] * v[0] + u[1] * v[1] + vertical_form(p, u) * vertical_form(p, v);
}

/// Canonical frame (E1, E2, E3) at p as coordinate vectors.
inline std::array<CoordVec<double>, 3> frame_at(const Nil3Point& p) {
  return {CoordVec<double>{1.0, 0.0, -0.5 * p.x2}, CoordVec<double>{0.0, 1.0, 0.5 * p.x1},
          CoordVec<double>{0.0, 0.0, 1.0}};
}

template <class T>
CoordVec<T> to_coords(const Nil3Point& p, const FrameCoeffs<T>& a) {
  return {a[0], a[1], a[2] - 0.5 * p.x2 * a[0] + 0.5 * p.x1 * a[1]};
}

template <class T>
FrameCoeffs<T> to_frame(const Nil3Point& p, const CoordVec<T>& v) {
  return {v[0], v[1], vertical_form(p, v)};
}

/// Frame coefficients of nabla_{Ei} Ej; i, j in {1, 2, 3}.
inline FrameCoeffs<double> gamma(int i, int j) {
  // table[i][j] = nabla_{E_{i+1}} E_{j+1}
  static constexpr double table[3][3][3] = {
      {{0.0, 0.0, 0.0}, {0.0, 0.0, 0.5}, {0.0, -0.5, 0.0}},
      {{0.0, 0.0, -0.5}, {0.0, 0.0, 0.0}, {0.5, 0.0, 0.0}},
      {{0.0, -0.5, 0.0}, {0.5, 0.0, 0.0}, {0.0, 0.0, 0.0}},
  };
  if (i < 1 || i > 3 || j < 1 || j > 3) throw std::out_of_range("nil3::gamma: frame index outside 1..3");
  const auto& g = table[i - 1][j - 1];
  return {g[0], g[1], g[2]};
}

/// nabla_a w for a field w with frame coefficients w and directional derivative dw = a(w_k).
template <class T>
FrameCoeffs<T> covariant_derivative(const FrameCoeffs<T>& a, const FrameCoeffs<T>& w, const FrameCoeffs<T>& dw) {
  FrameCoeffs<T> out = dw;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      const T aw = a[i] * w[j];
      if (aw == T{}) continue;
      const auto g = gamma(i + 1, j + 1);
      for (int k = 0; k < 3; ++k) out[k] += aw * g[k];
    }
  }
  return out;
}

/// Bilinear pairing of frame coefficients (orthonormal frame).
template <class T>
T dot(const FrameCoeffs<T>& a, const FrameCoeffs<T>& b) {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

/// Hermitian pairing <a, conj(b)>.
inline cplx hermitian(const FrameCoeffs<cplx>& a, const FrameCoeffs<cplx>& b) {
  return a[0] * std::conj(b[0]) + a[1] * std::conj(b[1]) + a[2] * std::conj(b[2]);
}

inline Nil3Point group_mul(const Nil3Point& p, const Nil3Point& q) {
  return {p.x1 + q.x1, p.x2 + q.x2, p.x3 + q.x3 + 0.5 * (p.x1 * q.x2 - p.x2 * q.x1)};
}

inline Nil3Point group_inv(const Nil3Point& p) { return {-p.x1, -p.x2, -p.x3}; }

/// Differential of q -> p*q applied to a coordinate vector (independent of q).
template <class T>
CoordVec<T> left_translate(const Nil3Point& p, const CoordVec<T>& v) {
  return {v[0], v[1], v[2] - 0.5 * p.x2 * v[0] + 0.5 * p.x1 * v[1]};
}

inline cplx project_pi(const Nil3Point& p) { return {p.x1, p.x2}; }

/// Stereographic projection from the South Pole of the unit sphere onto the plane n3 = 0.
inline cplx stereographic_south(const Vec3<double>& n) {
  const double denom = 1.0 + n[2];
  if (denom <= 1e-14) throw PoleError("stereographic_south: point at the South Pole");
  return cplx(n[0], n[1]) / denom;
}

}  // namespace nilsym::nil3
