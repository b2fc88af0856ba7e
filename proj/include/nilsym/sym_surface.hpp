#pragma once

// Sym-Bobenko reconstruction of the associated family of minimal immersions
//
//   fhat_t = -2 (dPsi/dt) Psi^{-1} + 2 Psi s0 Psi^{-1}
//   f_t    = -1/2 diag(s0 dfhat/dt) + offdiag(fhat_t)
//
// read through the matrix model (x1, x2, x3) <-> [[x3, x1 + i x2], [x1 - i x2, x3]].

#include <cmath>
#include <string>
#include <vector>

#include "nilsym/errors.hpp"
#include "nilsym/grid.hpp"
#include "nilsym/lax_frame.hpp"
#include "nilsym/mat2c.hpp"
#include "nilsym/nil3.hpp"
#include "nilsym/potential.hpp"

namespace nilsym::sym {

using lax::FrameTriple;
using nil3::Nil3Point;

inline Mat2C fhat_from_frame(const FrameTriple& f) {
  const Mat2C inv = f.psi.inverse();
  return -2.0 * (f.psi_t * inv) + 2.0 * (f.psi * sigma::s0 * inv);
}

/// d/dt fhat_t by exact product rule, using d/dt Psi^{-1} = -Psi^{-1} Psi_t Psi^{-1}.
inline Mat2C dfhat_dt(const FrameTriple& f) {
  const Mat2C inv = f.psi.inverse();
  const Mat2C pt_inv = f.psi_t * inv;
  return -2.0 * (f.psi_tt * inv) + 2.0 * (pt_inv * pt_inv) + 2.0 * (f.psi_t * sigma::s0 * inv) -
         2.0 * (f.psi * sigma::s0 * inv * pt_inv);
}

inline Mat2C ft_from_fhat(const FrameTriple& f) {
  return -0.5 * (sigma::s0 * dfhat_dt(f)).diag() + fhat_from_frame(f).offdiag();
}

/// Distance of m from the matrix-model shape [[x3, w], [conj w, x3]] with x3 real.
inline double model_shape_defect(const Mat2C& m) {
  return std::max({std::abs(m.m11 - m.m22), std::abs(m.m11.imag()), std::abs(m.m21 - std::conj(m.m12))});
}

/// Distance of m from the shape [[i a, w], [conj w, -i a]] with a real.
inline double fhat_shape_defect(const Mat2C& m) {
  return std::max({std::abs(m.m11 + m.m22), std::abs(m.m11.real()), std::abs(m.m21 - std::conj(m.m12))});
}

inline Nil3Point extract_coords(const Mat2C& m, double tol) {
  if (model_shape_defect(m) > tol)
    throw ShapeViolation("extract_coords: matrix off the Nil3 model shape by " + sci(model_shape_defect(m)));
  return {m.m12.real(), m.m12.imag(), m.m11.real()};
}

/// Matrix-model image of a point.
inline Mat2C to_matrix(const Nil3Point& p) {
  return p.x1 * sigma::s1 + p.x2 * sigma::s2 + p.x3 * sigma::s3;
}

struct SurfaceGrid {
  double t = 0.0;
  NodeField<cplx> F;       ///< horizontal projection x1 + i x2
  NodeField<double> h;     ///< height x3
  NodeField<double> hhat;  ///< fhat = [[i hhat, F], [conj F, -i hhat]]
  NodeField<Mat2C> fhat;
  lax::FrameField frames;
  double fhat_shape_defect = 0.0;
  double ft_shape_defect = 0.0;

  const Grid2D& grid() const { return F.grid(); }
  Nil3Point point(int i, int j) const { return {F(i, j).real(), F(i, j).imag(), h(i, j)}; }
};

struct SweepOptions {
  double shape_tol = 1e-6;
  lax::IntegrationOptions integration{};
};

/// Apply the Sym-Bobenko formula node by node to an integrated frame field.
inline SurfaceGrid surface_from_frames(lax::FrameField frames, double t, double shape_tol) {
  const Grid2D& g = frames.frames.grid();
  SurfaceGrid s{t, NodeField<cplx>(g), NodeField<double>(g), NodeField<double>(g), NodeField<Mat2C>(g), {}, 0.0, 0.0};
  for (int i = 0; i < g.ny; ++i)
    for (int j = 0; j < g.nx; ++j) {
      const auto& ft = frames.frames(i, j);
      const Mat2C fh = fhat_from_frame(ft);
      const Mat2C f = ft_from_fhat(ft);
      const double dh = fhat_shape_defect(fh);
      s.fhat_shape_defect = std::max(s.fhat_shape_defect, dh);
      s.ft_shape_defect = std::max(s.ft_shape_defect, model_shape_defect(f));
      if (dh > shape_tol)
        throw ShapeViolation("fhat off shape by " + sci(dh) + " at node (" + std::to_string(i) + ", " +
                             std::to_string(j) + ")");
      const Nil3Point p = extract_coords(f, shape_tol);
      s.F(i, j) = {p.x1, p.x2};
      s.h(i, j) = p.x3;
      s.hhat(i, j) = fh.m11.imag();
      s.fhat(i, j) = fh;
    }
  s.frames = std::move(frames);
  return s;
}

inline SurfaceGrid surface_at(const PotentialSpec& spec, const Grid2D& g, double t, const SweepOptions& opts = {}) {
  return surface_from_frames(lax::integrate_grid(spec, g, t, opts.integration), t, opts.shape_tol);
}

inline std::vector<SurfaceGrid> sweep_family(const PotentialSpec& spec, const Grid2D& g,
                                             const std::vector<double>& t_values, const SweepOptions& opts = {}) {
  std::vector<SurfaceGrid> out;
  out.reserve(t_values.size());
  for (double t : t_values) out.push_back(surface_at(spec, g, t, opts));
  return out;
}

/// Node-wise defect of fhat_{z zbar} = (i/4) [fhat_z, fhat_zbar]; NaN on boundary nodes.
inline NodeField<Mat2C> commutator_identity_residual(const NodeField<Mat2C>& fhat) {
  const auto fz = grid_dz(fhat);
  const auto fzb = grid_dzbar(fhat);
  const auto fzzb = grid_dzdzbar(fhat);
  const Grid2D& g = fhat.grid();
  NodeField<Mat2C> r(g, nan_value<Mat2C>());
  for (int i = 1; i < g.ny - 1; ++i)
    for (int j = 1; j < g.nx - 1; ++j) r(i, j) = fzzb(i, j) - (0.25 * kI) * commutator(fz(i, j), fzb(i, j));
  return r;
}

}  // namespace nilsym::sym
