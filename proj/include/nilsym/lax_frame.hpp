#pragma once

// Extended frame Psi_t of the Lax system
//
//   Psi^{-1} dPsi = U dz + V dzbar,   Psi(0) = identity,
//
//   U = 1/4 [[ L,                      i s ],
//            [ -4i Q0 e^{2it} / s,     -L  ]]
//   V = 1/4 [[ -conj(L),  4i conj(Q0) e^{-2it} / s ],
//            [ -i s,      conj(L)                    ]]
//
// with s = sqrt(rho0) and L = (log rho0)_z. The t-dependence sits in a single
// entry of each matrix, so the t-derivatives of the connection are exact and
// Psi_t, d/dt Psi_t and d2/dt2 Psi_t are integrated together as one linear ODE.

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>

#include "nilsym/errors.hpp"
#include "nilsym/grid.hpp"
#include "nilsym/mat2c.hpp"
#include "nilsym/potential.hpp"

namespace nilsym::lax {

struct ConnectionPair {
  Mat2C U, V;      ///< dz and dzbar coefficients
  Mat2C Ut, Vt;    ///< first t-derivatives
  Mat2C Utt, Vtt;  ///< second t-derivatives
};

struct FrameTriple {
  Mat2C psi = Mat2C::identity();
  Mat2C psi_t{};
  Mat2C psi_tt{};
};

inline ConnectionPair connection_at(const PotentialSpec& spec, cplx z, double t) {
  const double rho = eval_rho0(spec, z);
  const double s = std::sqrt(rho);
  const cplx L = eval_dlogrho0_dz(spec, z);
  const cplx q = eval_Q0(spec, z);
  const cplx phase = std::polar(1.0, 2.0 * t);

  ConnectionPair c;
  c.U = Mat2C{L, kI * s, -4.0 * kI * q * phase / s, -L} * 0.25;
  c.V = Mat2C{-std::conj(L), 4.0 * kI * std::conj(q) * std::conj(phase) / s, -kI * s, std::conj(L)} * 0.25;
  c.Ut = Mat2C{0.0, 0.0, 2.0 * kI * c.U.m21, 0.0};
  c.Utt = Mat2C{0.0, 0.0, -4.0 * c.U.m21, 0.0};
  c.Vt = Mat2C{0.0, -2.0 * kI * c.V.m12, 0.0, 0.0};
  c.Vtt = Mat2C{0.0, -4.0 * c.V.m12, 0.0, 0.0};
  return c;
}

/// Zero-curvature defect U_zbar - V_z - [U, V] by central differences with step `probe`.
inline Mat2C flatness_residual(const PotentialSpec& spec, cplx z, double t, double probe) {
  const auto e = connection_at(spec, z + probe, t), w = connection_at(spec, z - probe, t);
  const auto n = connection_at(spec, z + cplx(0, probe), t), s = connection_at(spec, z - cplx(0, probe), t);
  const auto c = connection_at(spec, z, t);
  const double inv = 1.0 / (2.0 * probe);
  const Mat2C Ux = (e.U - w.U) * inv, Uy = (n.U - s.U) * inv;
  const Mat2C Vx = (e.V - w.V) * inv, Vy = (n.V - s.V) * inv;
  const Mat2C U_zbar = 0.5 * (Ux + kI * Uy);
  const Mat2C V_z = 0.5 * (Vx - kI * Vy);
  return U_zbar - V_z - commutator(c.U, c.V);
}

/// Probe step suited to the rho0 source: solver spacing for sampled data, small otherwise.
inline double default_flatness_probe(const PotentialSpec& spec) {
  if (const auto* s = std::get_if<rho0::Solved>(&spec.rho0_source)) return s->log_rho->grid().h();
  return 1e-4;
}

namespace detail {

struct Segment {
  Mat2C w, wt, wtt;
};

inline Segment along(const ConnectionPair& c, cplx dz) {
  const cplx dzb = std::conj(dz);
  return {c.U * dz + c.V * dzb, c.Ut * dz + c.Vt * dzb, c.Utt * dz + c.Vtt * dzb};
}

inline FrameTriple rhs(const FrameTriple& f, const Segment& s) {
  return {f.psi * s.w, f.psi_t * s.w + f.psi * s.wt, f.psi_tt * s.w + 2.0 * (f.psi_t * s.wt) + f.psi * s.wtt};
}

inline FrameTriple axpy(const FrameTriple& f, double a, const FrameTriple& k) {
  return {f.psi + a * k.psi, f.psi_t + a * k.psi_t, f.psi_tt + a * k.psi_tt};
}

}  // namespace detail

/// One classical RK4 step along the straight segment z_from -> z_to, given the
/// connection at the start, midpoint and end of the segment.
inline FrameTriple rk4_step(const FrameTriple& state, const ConnectionPair& c0, const ConnectionPair& cm,
                            const ConnectionPair& c1, cplx dz) {
  const auto s0 = detail::along(c0, dz), sm = detail::along(cm, dz), s1 = detail::along(c1, dz);
  const FrameTriple k1 = detail::rhs(state, s0);
  const FrameTriple k2 = detail::rhs(detail::axpy(state, 0.5, k1), sm);
  const FrameTriple k3 = detail::rhs(detail::axpy(state, 0.5, k2), sm);
  const FrameTriple k4 = detail::rhs(detail::axpy(state, 1.0, k3), s1);
  FrameTriple out = state;
  out = detail::axpy(out, 1.0 / 6.0, k1);
  out = detail::axpy(out, 1.0 / 3.0, k2);
  out = detail::axpy(out, 1.0 / 3.0, k3);
  out = detail::axpy(out, 1.0 / 6.0, k4);
  return out;
}

inline FrameTriple rk4_step(const FrameTriple& state, const PotentialSpec& spec, cplx z_from, cplx z_to, double t) {
  return rk4_step(state, connection_at(spec, z_from, t), connection_at(spec, 0.5 * (z_from + z_to), t),
                  connection_at(spec, z_to, t), z_to - z_from);
}

enum class PropagationOrder {
  RowFirst,     ///< row through the origin node, then every column (canonical)
  ColumnFirst,  ///< column through the origin node, then every row
};

struct IntegrationOptions {
  PropagationOrder order = PropagationOrder::RowFirst;
  bool check_flatness = true;
  double flatness_threshold = 1e-4;  ///< widened to 2 probe^2, the probe's own truncation error
  double flatness_probe = 0.0;  ///< 0 selects default_flatness_probe
  int flatness_samples = 17;    ///< samples per direction
};

struct FrameField {
  NodeField<FrameTriple> frames;
  double max_det_deviation = 0.0;  ///< max |det psi - 1|
  double max_entry = 0.0;          ///< max |psi_ij|
  double max_flatness = 0.0;       ///< max sampled zero-curvature defect
};

/// Max sampled zero-curvature defect over a coarse lattice of interior nodes.
inline double sampled_flatness(const PotentialSpec& spec, const Grid2D& g, double t, double probe, int samples) {
  double m = 0.0;
  const int si = std::max(1, (g.ny - 2) / std::max(1, samples - 1));
  const int sj = std::max(1, (g.nx - 2) / std::max(1, samples - 1));
  for (int i = 1; i < g.ny - 1; i += si)
    for (int j = 1; j < g.nx - 1; j += sj) m = std::max(m, flatness_residual(spec, g.z(i, j), t, probe).max_abs());
  return m;
}

/// Integrate the frame triple to every node from Psi(0) = identity along a fixed path.
inline FrameField integrate_grid(const PotentialSpec& spec, const Grid2D& g, double t,
                                 const IntegrationOptions& opts = {}) {
  validate_domain(g, spec);
  FrameField out{NodeField<FrameTriple>(g), 0.0, 0.0, 0.0};
  if (opts.check_flatness) {
    const double probe = opts.flatness_probe > 0.0 ? opts.flatness_probe : default_flatness_probe(spec);
    const double threshold = std::max(opts.flatness_threshold, 2.0 * probe * probe);
    out.max_flatness = sampled_flatness(spec, g, t, probe, opts.flatness_samples);
    if (!(out.max_flatness <= threshold))
      throw NonFlatInput("connection not flat: defect " + sci(out.max_flatness) + " > " + sci(threshold) +
                         " (frames would depend on the path)");
  }

  NodeField<ConnectionPair> conn(g);
  for (int i = 0; i < g.ny; ++i)
    for (int j = 0; j < g.nx; ++j) conn(i, j) = connection_at(spec, g.z(i, j), t);

  auto& F = out.frames;
  auto step = [&](int i0, int j0, int i1, int j1) {
    const cplx z0 = g.z(i0, j0), z1 = g.z(i1, j1);
    F(i1, j1) = rk4_step(F(i0, j0), conn(i0, j0), connection_at(spec, 0.5 * (z0 + z1), t), conn(i1, j1), z1 - z0);
  };

  const int j0 = static_cast<int>(std::lround(-g.xmin / g.hx()));
  const int i0 = static_cast<int>(std::lround(-g.ymin / g.hy()));
  const cplx z_origin = g.z(i0, j0);
  // Off-node origin: one step from z = 0 to the nearest node.
  F(i0, j0) = z_origin == 0.0 ? FrameTriple{} : rk4_step(FrameTriple{}, spec, 0.0, z_origin, t);

  if (opts.order == PropagationOrder::RowFirst) {
    for (int j = j0 + 1; j < g.nx; ++j) step(i0, j - 1, i0, j);
    for (int j = j0 - 1; j >= 0; --j) step(i0, j + 1, i0, j);
    for (int j = 0; j < g.nx; ++j) {
      for (int i = i0 + 1; i < g.ny; ++i) step(i - 1, j, i, j);
      for (int i = i0 - 1; i >= 0; --i) step(i + 1, j, i, j);
    }
  } else {
    for (int i = i0 + 1; i < g.ny; ++i) step(i - 1, j0, i, j0);
    for (int i = i0 - 1; i >= 0; --i) step(i + 1, j0, i, j0);
    for (int i = 0; i < g.ny; ++i) {
      for (int j = j0 + 1; j < g.nx; ++j) step(i, j - 1, i, j);
      for (int j = j0 - 1; j >= 0; --j) step(i, j + 1, i, j);
    }
  }

  for (const auto& f : F.values()) {
    out.max_det_deviation = std::max(out.max_det_deviation, std::abs(f.psi.det() - 1.0));
    out.max_entry = std::max(out.max_entry, f.psi.max_abs());
  }
  return out;
}

}  // namespace nilsym::lax
