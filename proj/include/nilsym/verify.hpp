#pragma once

// Finite-difference audit of a discrete surface f = (F, h) in Nil3.
//
// All geometry is assembled from frame coefficients of f_z:
//   a = (x1_z, x2_z, x3_z + (x2 x1_z - x1 x2_z)/2),   A = a3,
// and f_zbar has coefficients conj(a). First derivatives are central
// differences; second derivatives use the compact 3-point and 4-point
// cross stencils, so every node quantity needs a one-node margin and
// derivatives of node quantities (Q_zbar, tension of g) need two.

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <string>

#include "nilsym/errors.hpp"
#include "nilsym/grid.hpp"
#include "nilsym/nil3.hpp"
#include "nilsym/potential.hpp"
#include "nilsym/sym_surface.hpp"

namespace nilsym::verify {

using nil3::FrameCoeffs;

struct DiscreteSurface {
  NodeField<cplx> F;
  NodeField<double> h;
  std::optional<NodeField<double>> hhat;

  const Grid2D& grid() const { return F.grid(); }
};

inline DiscreteSurface from_sym(const sym::SurfaceGrid& s) { return {s.F, s.h, s.hhat}; }

struct VerifyOptions {
  double phi_min = 0.05;         ///< Gauss map only evaluated where phi > phi_min
  int margin = 2;                ///< boundary layers excluded from max-norms
  double degenerate_rho = 1e-12; ///< conformal factor below this is not an immersion
  /// Additional physical distance from the rectangle edges excluded from max-norms;
  /// refinement studies set it to the coarsest grid's margin so all levels cover the same region.
  double inset = 0.0;
};

struct Stats {
  double mean = 0.0, min = 0.0, max = 0.0;
  int count = 0;
};

struct MaxNorms {
  double conformality = 0.0;  ///< |<f_z, f_z>|
  double R1 = 0.0;            ///< |F_{z zbar} - (i/2)(conj(A) F_z + A F_zbar)|
  double R2 = 0.0;            ///< |A_zbar + conj(A)_z|
  double covariant = 0.0;     ///< |nabla_{f_z} f_zbar|
  std::optional<double> A_consistency;  ///< |A - i hhat_z|, when hhat is known
  double Q_holomorphy = 0.0;  ///< |Q_zbar|
  double tension = 0.0;       ///< |tau(g)| where phi > phi_min
};

struct ResidualReport {
  NodeField<cplx> conformality, R1, R2, A, w, p, Q, Q_zbar, g, tension;
  NodeField<FrameCoeffs<cplx>> covariant;
  NodeField<double> rho, phi;
  std::optional<NodeField<cplx>> A_consistency;
  NodeField<nil3::Vec3<double>> normal;

  MaxNorms max;
  int margin = 2;
  double inset = 0.0;
  int nodes_total = 0;
  int nodes_checked = 0;   ///< nodes inside the margin
  int gauss_skipped = 0;   ///< checked nodes where the tension could not be evaluated (phi too small)
  double rho_min = 0.0;
  double phi_lo = 0.0, phi_hi = 0.0;
};

/// Whether node (i, j) counts towards the max-norms of `rep`.
inline bool checked(const ResidualReport& rep, int i, int j) {
  const Grid2D& g = rep.rho.grid();
  if (!g.inside(i, j, rep.margin)) return false;
  if (rep.inset <= 0.0) return true;
  const double slack = 1e-9 * g.h();
  const double x = g.x(j), y = g.y(i);
  return x >= g.xmin + rep.inset - slack && x <= g.xmax - rep.inset + slack && y >= g.ymin + rep.inset - slack &&
         y <= g.ymax - rep.inset + slack;
}

/// Frame coefficients of f_z and related first/second order data at one node.
struct NodeJet {
  FrameCoeffs<cplx> a;     ///< f_z
  FrameCoeffs<cplx> da;    ///< d/dz of the coefficients of f_z
  FrameCoeffs<cplx> dbz;   ///< d/dz of the coefficients of f_zbar
  cplx Fz, Fzbar, Fzzbar;
  cplx A_zbar;
};

inline NodeJet node_jet(const NodeField<double>& x1f, const NodeField<double>& x2f, const NodeField<double>& x3f,
                        int i, int j) {
  const auto p1 = partials_at(x1f, i, j), p2 = partials_at(x2f, i, j), p3 = partials_at(x3f, i, j);
  const double x1 = p1.value, x2 = p2.value;
  const cplx x1z = p1.dz(), x2z = p2.dz(), x3z = p3.dz();
  const cplx x1zb = p1.dzbar(), x2zb = p2.dzbar();
  const cplx x1zz = p1.dzdz(), x2zz = p2.dzdz(), x3zz = p3.dzdz();
  const double x1zzb = p1.dzdzbar(), x2zzb = p2.dzdzbar(), x3zzb = p3.dzdzbar();

  NodeJet jet;
  jet.a = {x1z, x2z, x3z + 0.5 * (x2 * x1z - x1 * x2z)};
  jet.da = {x1zz, x2zz, x3zz + 0.5 * (x2 * x1zz - x1 * x2zz)};
  jet.dbz = {x1zzb, x2zzb, x3zzb + 0.5 * (x2z * x1zb + x2 * x1zzb - x1z * x2zb - x1 * x2zzb)};
  jet.Fz = x1z + kI * x2z;
  jet.Fzbar = x1zb + kI * x2zb;
  jet.Fzzbar = cplx(x1zzb, x2zzb);
  jet.A_zbar = x3zzb + 0.5 * (x2zb * x1z + x2 * x1zzb - x1zb * x2z - x1 * x2zzb);
  return jet;
}

/// Unit normal with (f_x, f_y, N) right-handed, in frame coefficients.
inline nil3::Vec3<double> unit_normal(const FrameCoeffs<cplx>& a) {
  const nil3::Vec3<double> fx{2.0 * a[0].real(), 2.0 * a[1].real(), 2.0 * a[2].real()};
  const nil3::Vec3<double> fy{-2.0 * a[0].imag(), -2.0 * a[1].imag(), -2.0 * a[2].imag()};
  const nil3::Vec3<double> n{fx[1] * fy[2] - fx[2] * fy[1], fx[2] * fy[0] - fx[0] * fy[2], fx[0] * fy[1] - fx[1] * fy[0]};
  const double len = std::sqrt(n[0] * n[0] + n[1] * n[1] + n[2] * n[2]);
  if (!(len > 0.0)) throw DegenerateNode("unit_normal: tangent vectors are parallel");
  return {n[0] / len, n[1] / len, n[2] / len};
}

/// Harmonic-map tension into the Poincare disk, g_{z zbar} + 2 conj(g) g_z g_zbar / (1 - |g|^2).
inline cplx disk_tension(cplx g, cplx gz, cplx gzbar, cplx gzzbar) {
  return gzzbar + 2.0 * std::conj(g) * gz * gzbar / (1.0 - std::norm(g));
}

/// Tension of a node field of disk values; NaN where the 5-point stencil touches a NaN.
inline NodeField<cplx> tension_field(const NodeField<cplx>& g) {
  const Grid2D& grid = g.grid();
  NodeField<cplx> tau(grid, nan_value<cplx>());
  const double hx = grid.hx(), hy = grid.hy();
  for (int i = 1; i < grid.ny - 1; ++i)
    for (int j = 1; j < grid.nx - 1; ++j) {
      const cplx c = g(i, j), e = g(i, j + 1), w = g(i, j - 1), n = g(i + 1, j), s = g(i - 1, j);
      if (std::isnan(c.real()) || std::isnan(e.real()) || std::isnan(w.real()) || std::isnan(n.real()) ||
          std::isnan(s.real()))
        continue;
      const cplx gx = (e - w) / (2.0 * hx), gy = (n - s) / (2.0 * hy);
      const cplx gzz = 0.25 * ((e - 2.0 * c + w) / (hx * hx) + (n - 2.0 * c + s) / (hy * hy));
      tau(i, j) = disk_tension(c, 0.5 * (gx - kI * gy), 0.5 * (gx + kI * gy), gzz);
    }
  return tau;
}

inline ResidualReport verify_surface(const DiscreteSurface& surf, const VerifyOptions& opts = {}) {
  const Grid2D& g = surf.grid();
  if (g.nx < 2 * opts.margin + 1 || g.ny < 2 * opts.margin + 1) throw DomainError("verify: grid smaller than margin");
  NodeField<double> x1(g), x2(g);
  for (int i = 0; i < g.ny; ++i)
    for (int j = 0; j < g.nx; ++j) {
      x1(i, j) = surf.F(i, j).real();
      x2(i, j) = surf.F(i, j).imag();
    }

  const cplx nanc = nan_value<cplx>();
  ResidualReport rep;
  for (auto* f : {&rep.conformality, &rep.R1, &rep.R2, &rep.A, &rep.w, &rep.p, &rep.Q, &rep.g})
    *f = NodeField<cplx>(g, nanc);
  rep.covariant = NodeField<FrameCoeffs<cplx>>(g, {nanc, nanc, nanc});
  rep.rho = NodeField<double>(g, kNaN);
  rep.phi = NodeField<double>(g, kNaN);
  rep.normal = NodeField<nil3::Vec3<double>>(g, {kNaN, kNaN, kNaN});
  if (surf.hhat) rep.A_consistency = NodeField<cplx>(g, nanc);

  for (int i = 1; i < g.ny - 1; ++i)
    for (int j = 1; j < g.nx - 1; ++j) {
      const NodeJet jet = node_jet(x1, x2, surf.h, i, j);
      const cplx A = jet.a[2];
      const FrameCoeffs<cplx> b{std::conj(jet.a[0]), std::conj(jet.a[1]), std::conj(jet.a[2])};
      const double rho = 2.0 * nil3::hermitian(jet.a, jet.a).real();
      if (!(rho > opts.degenerate_rho))
        throw DegenerateNode("verify: conformal factor " + sci(rho) + " at node (" + std::to_string(i) +
                             ", " + std::to_string(j) + ")");
      const auto N = unit_normal(jet.a);
      const FrameCoeffs<cplx> Nc{N[0], N[1], N[2]};
      const auto nabla_zz = nil3::covariant_derivative(jet.a, jet.a, jet.da);
      const cplx p = nil3::dot(nabla_zz, Nc);

      rep.A(i, j) = A;
      rep.w(i, j) = jet.Fz;
      rep.rho(i, j) = rho;
      rep.conformality(i, j) = nil3::dot(jet.a, jet.a);
      rep.R1(i, j) = jet.Fzzbar - 0.5 * kI * (std::conj(A) * jet.Fz + A * jet.Fzbar);
      rep.R2(i, j) = jet.A_zbar + std::conj(jet.A_zbar);
      rep.covariant(i, j) = nil3::covariant_derivative(jet.a, b, jet.dbz);
      rep.normal(i, j) = N;
      rep.phi(i, j) = N[2];
      rep.p(i, j) = p;
      rep.Q(i, j) = kI * p + A * A;
      if (N[2] > opts.phi_min) rep.g(i, j) = nil3::stereographic_south(N);
      if (surf.hhat) {
        const auto ph = partials_at(*surf.hhat, i, j);
        (*rep.A_consistency)(i, j) = A - kI * ph.dz();
      }
    }
  rep.Q_zbar = grid_dzbar(rep.Q);
  rep.tension = tension_field(rep.g);

  rep.margin = opts.margin;
  rep.inset = opts.inset;
  rep.nodes_total = static_cast<int>(g.size());
  rep.rho_min = std::numeric_limits<double>::infinity();
  rep.phi_lo = std::numeric_limits<double>::infinity();
  rep.phi_hi = -std::numeric_limits<double>::infinity();
  auto cov_norm = [](const FrameCoeffs<cplx>& v) { return std::sqrt(std::norm(v[0]) + std::norm(v[1]) + std::norm(v[2])); };
  for (int i = opts.margin; i < g.ny - opts.margin; ++i)
    for (int j = opts.margin; j < g.nx - opts.margin; ++j) {
      if (!checked(rep, i, j)) continue;
      ++rep.nodes_checked;
      rep.max.conformality = std::max(rep.max.conformality, std::abs(rep.conformality(i, j)));
      rep.max.R1 = std::max(rep.max.R1, std::abs(rep.R1(i, j)));
      rep.max.R2 = std::max(rep.max.R2, std::abs(rep.R2(i, j)));
      rep.max.covariant = std::max(rep.max.covariant, cov_norm(rep.covariant(i, j)));
      rep.max.Q_holomorphy = std::max(rep.max.Q_holomorphy, std::abs(rep.Q_zbar(i, j)));
      const cplx tau = rep.tension(i, j);
      if (std::isnan(tau.real()))
        ++rep.gauss_skipped;
      else
        rep.max.tension = std::max(rep.max.tension, std::abs(tau));
      rep.rho_min = std::min(rep.rho_min, rep.rho(i, j));
      rep.phi_lo = std::min(rep.phi_lo, rep.phi(i, j));
      rep.phi_hi = std::max(rep.phi_hi, rep.phi(i, j));
    }
  if (rep.A_consistency) {
    double m = 0.0;
    for (int i = opts.margin; i < g.ny - opts.margin; ++i)
      for (int j = opts.margin; j < g.nx - opts.margin; ++j)
        if (checked(rep, i, j)) m = std::max(m, std::abs((*rep.A_consistency)(i, j)));
    rep.max.A_consistency = m;
  }
  return rep;
}

/// Ratios of the measured conformal factor and Abresch-Rosenberg differential to the potential data.
struct PotentialRatios {
  Stats rho_over_rho0;
  Stats Q_over_Q0_abs;
  double Q_over_Q0_phase = 0.0;  ///< arg of the mean of Q / (Q0 e^{2it})
};

inline PotentialRatios potential_ratios(const ResidualReport& rep, const PotentialSpec& spec, double t) {
  const Grid2D& g = rep.rho.grid();
  PotentialRatios out;
  auto push = [](Stats& s, double v) {
    if (s.count == 0) s.min = s.max = v;
    s.min = std::min(s.min, v);
    s.max = std::max(s.max, v);
    s.mean += v;
    ++s.count;
  };
  cplx phase_sum = 0.0;
  for (int i = rep.margin; i < g.ny - rep.margin; ++i)
    for (int j = rep.margin; j < g.nx - rep.margin; ++j) {
      if (!checked(rep, i, j)) continue;
      const cplx z = g.z(i, j);
      push(out.rho_over_rho0, rep.rho(i, j) / eval_rho0(spec, z));
      const cplx q0 = eval_Q0(spec, z) * std::polar(1.0, 2.0 * t);
      if (std::abs(q0) > 1e-12) {
        push(out.Q_over_Q0_abs, std::abs(rep.Q(i, j)) / std::abs(q0));
        phase_sum += rep.Q(i, j) / q0;
      }
    }
  for (Stats* s : {&out.rho_over_rho0, &out.Q_over_Q0_abs})
    if (s->count > 0) s->mean /= s->count;
  out.Q_over_Q0_phase = std::arg(phase_sum);
  return out;
}

}  // namespace nilsym::verify
