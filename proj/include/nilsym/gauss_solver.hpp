#pragma once

// Newton solver for the Gauss equation (log rho0)_{z zbar} = rho0/8 - 2|Q0|^2/rho0
// in the unknown u = log rho0:
//
//   Lap(u)/4 - exp(u)/8 + 2|Q0|^2 exp(-u) = 0,   u = bc on the boundary.
//
// Each Newton step solves (c - Lap/4) delta = r with c = exp(u)/8 + 2|Q0|^2 exp(-u) > 0,
// a symmetric positive definite system handled by unpreconditioned conjugate gradients.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include "nilsym/errors.hpp"
#include "nilsym/grid.hpp"
#include "nilsym/potential.hpp"

namespace nilsym::gauss {

struct SolverSettings {
  double tol = 1e-10;        ///< max-norm of the PDE residual
  int max_iter = 50;         ///< Newton iterations
  double cg_rel_tol = 1e-12; ///< relative l2 tolerance of each linear solve
  int max_halvings = 40;
};

struct SolverGrid {
  NodeField<double> u;
  std::vector<double> residual_history;  ///< max-norm before the first step and after each accepted step
  int iterations = 0;                    ///< Newton steps taken
  long cg_iterations = 0;

  const Grid2D& grid() const { return u.grid(); }
};

/// Interior residual of the Gauss equation; zero on boundary nodes.
inline NodeField<double> pde_residual(const NodeField<double>& u, const HolomorphicPolynomial& q0) {
  const Grid2D& g = u.grid();
  NodeField<double> r(g, 0.0);
  const double ihx2 = 1.0 / (g.hx() * g.hx()), ihy2 = 1.0 / (g.hy() * g.hy());
  for (int i = 1; i < g.ny - 1; ++i)
    for (int j = 1; j < g.nx - 1; ++j) {
      const double c = u(i, j);
      const double lap = (u(i, j + 1) - 2.0 * c + u(i, j - 1)) * ihx2 + (u(i + 1, j) - 2.0 * c + u(i - 1, j)) * ihy2;
      const double q2 = std::norm(q0(g.z(i, j)));
      r(i, j) = 0.25 * lap - std::exp(c) / 8.0 + 2.0 * q2 * std::exp(-c);
    }
  return r;
}

namespace detail {

inline double dot(const NodeField<double>& a, const NodeField<double>& b) {
  double s = 0.0;
  const auto av = a.values(), bv = b.values();
  for (std::size_t k = 0; k < av.size(); ++k) s += av[k] * bv[k];
  return s;
}

/// y = (c - Lap/4) x on interior nodes; x is zero on the boundary.
inline void apply(const NodeField<double>& coef, const NodeField<double>& x, NodeField<double>& y) {
  const Grid2D& g = x.grid();
  const double ihx2 = 1.0 / (g.hx() * g.hx()), ihy2 = 1.0 / (g.hy() * g.hy());
  for (int i = 1; i < g.ny - 1; ++i)
    for (int j = 1; j < g.nx - 1; ++j) {
      const double c = x(i, j);
      const double lap = (x(i, j + 1) - 2.0 * c + x(i, j - 1)) * ihx2 + (x(i + 1, j) - 2.0 * c + x(i - 1, j)) * ihy2;
      y(i, j) = coef(i, j) * c - 0.25 * lap;
    }
}

/// Conjugate gradients for (c - Lap/4) x = rhs with homogeneous Dirichlet data.
inline NodeField<double> cg_solve(const NodeField<double>& coef, const NodeField<double>& rhs, double rel_tol,
                                  long& iterations) {
  const Grid2D& g = rhs.grid();
  NodeField<double> x(g, 0.0), r = rhs, p = rhs, ap(g, 0.0);
  for (int i = 0; i < g.ny; ++i)
    for (int j = 0; j < g.nx; ++j)
      if (!g.inside(i, j, 1)) r(i, j) = p(i, j) = 0.0;
  double rr = dot(r, r);
  const double stop = rel_tol * rel_tol * rr;
  if (rr == 0.0) return x;
  const long max_it = 10 * static_cast<long>(g.size()) + 100;
  for (long it = 0; it < max_it; ++it) {
    apply(coef, p, ap);
    const double pap = dot(p, ap);
    if (!(pap > 0.0)) throw LinearSolveFailure("cg: operator not positive definite");
    const double alpha = rr / pap;
    auto xv = x.values();
    auto rv = r.values();
    const std::span<const double> pv = p.values(), apv = ap.values();
    for (std::size_t k = 0; k < xv.size(); ++k) {
      xv[k] += alpha * pv[k];
      rv[k] -= alpha * apv[k];
    }
    const double rr_new = dot(r, r);
    ++iterations;
    if (!std::isfinite(rr_new)) throw LinearSolveFailure("cg: non-finite residual");
    if (rr_new <= stop) return x;
    const double beta = rr_new / rr;
    auto pm = p.values();
    for (std::size_t k = 0; k < pm.size(); ++k) pm[k] = rv[k] + beta * pm[k];
    rr = rr_new;
  }
  throw LinearSolveFailure("cg: no convergence within iteration limit");
}

inline double max_abs(const NodeField<double>& f) {
  double m = 0.0;
  for (double v : f.values()) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace detail

/// Harmonic function matching the boundary values of `bc`.
inline NodeField<double> harmonic_extension(const NodeField<double>& bc, double rel_tol = 1e-12) {
  const Grid2D& g = bc.grid();
  NodeField<double> lifted(g, 0.0);
  for (int i = 0; i < g.ny; ++i)
    for (int j = 0; j < g.nx; ++j)
      if (!g.inside(i, j, 1)) lifted(i, j) = bc(i, j);
  // -Lap/4 (lifted + v) = 0  =>  (-Lap/4) v = Lap(lifted)/4 on the interior.
  NodeField<double> zero_coef(g, 0.0), rhs(g, 0.0);
  detail::apply(zero_coef, lifted, rhs);
  for (double& v : rhs.values()) v = -v;
  long its = 0;
  NodeField<double> v = detail::cg_solve(zero_coef, rhs, rel_tol, its);
  for (int i = 1; i < g.ny - 1; ++i)
    for (int j = 1; j < g.nx - 1; ++j) lifted(i, j) = v(i, j);
  return lifted;
}

/// Newton iteration from `initial` (boundary values of `initial` are the Dirichlet data).
inline SolverGrid newton_solve(const HolomorphicPolynomial& q0, NodeField<double> initial,
                               const SolverSettings& settings = {}) {
  if (!(settings.tol > 0.0)) throw DomainError("newton_solve: tol must be positive");
  const Grid2D& g = initial.grid();
  for (double v : initial.values())
    if (!std::isfinite(v)) throw DomainError("newton_solve: non-finite boundary or initial data");

  SolverGrid out{std::move(initial), {}, 0, 0};
  NodeField<double> r = pde_residual(out.u, q0);
  double rnorm = detail::max_abs(r);
  out.residual_history.push_back(rnorm);

  NodeField<double> coef(g, 0.0);
  while (rnorm > settings.tol) {
    if (out.iterations >= settings.max_iter)
      throw MaxIterExceeded("newton_solve: residual " + sci(rnorm) + " above tolerance after " +
                            std::to_string(out.iterations) + " iterations");
    for (int i = 0; i < g.ny; ++i)
      for (int j = 0; j < g.nx; ++j) {
        const double uij = out.u(i, j);
        coef(i, j) = std::exp(uij) / 8.0 + 2.0 * std::norm(q0(g.z(i, j))) * std::exp(-uij);
      }
    const NodeField<double> delta = detail::cg_solve(coef, r, settings.cg_rel_tol, out.cg_iterations);

    double step = 1.0;
    bool accepted = false;
    NodeField<double> trial = out.u;
    for (int k = 0; k <= settings.max_halvings; ++k, step *= 0.5) {
      auto tv = trial.values();
      const std::span<const double> uv = out.u.values(), dv = delta.values();
      for (std::size_t n = 0; n < tv.size(); ++n) tv[n] = uv[n] + step * dv[n];
      NodeField<double> r_trial = pde_residual(trial, q0);
      const double trial_norm = detail::max_abs(r_trial);
      if (trial_norm < rnorm) {
        out.u = std::move(trial);
        r = std::move(r_trial);
        rnorm = trial_norm;
        accepted = true;
        break;
      }
    }
    if (!accepted)
      throw MaxIterExceeded("newton_solve: residual stagnated at " + sci(rnorm));
    ++out.iterations;
    out.residual_history.push_back(rnorm);
  }
  return out;
}

/// Newton solve started from the harmonic extension of the boundary data.
inline SolverGrid newton_solve_from_bc(const HolomorphicPolynomial& q0, const NodeField<double>& bc,
                                       const SolverSettings& settings = {}) {
  return newton_solve(q0, harmonic_extension(bc, settings.cg_rel_tol), settings);
}

/// Field with every node set from f(z); only boundary entries matter as Dirichlet data.
template <class F>
NodeField<double> sample_boundary(const Grid2D& g, F&& f) {
  NodeField<double> bc(g, 0.0);
  for (int i = 0; i < g.ny; ++i)
    for (int j = 0; j < g.nx; ++j)
      if (!g.inside(i, j, 1)) bc(i, j) = f(g.z(i, j));
  return bc;
}

/// Solver grid for a frame integration on `integration`: spacing divided by `refine`,
/// rectangle padded by `pad_fraction` of its extent (rounded to whole solver cells, at
/// least two) so that every RK4 sample point is an interior solver node.
inline Grid2D padded_solver_grid(const Grid2D& integration, int refine, double pad_fraction) {
  if (refine < 2) throw DomainError("solver grid must be at least 2x finer than the integration grid");
  const double hx = integration.hx() / refine, hy = integration.hy() / refine;
  const int px = std::max(2, static_cast<int>(std::ceil(pad_fraction * (integration.xmax - integration.xmin) / hx - 1e-9)));
  const int py = std::max(2, static_cast<int>(std::ceil(pad_fraction * (integration.ymax - integration.ymin) / hy - 1e-9)));
  return {integration.xmin - px * hx, integration.xmax + px * hx, integration.ymin - py * hy,
          integration.ymax + py * hy,  (integration.nx - 1) * refine + 1 + 2 * px,
          (integration.ny - 1) * refine + 1 + 2 * py};
}

/// CSV dump "x,y,u" in row-major node order.
inline void write_csv(const NodeField<double>& u, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open " + path + " for writing");
  const Grid2D& g = u.grid();
  os << "x,y,u\n";
  char buf[96];
  for (int i = 0; i < g.ny; ++i)
    for (int j = 0; j < g.nx; ++j) {
      std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", g.x(j), g.y(i), u(i, j));
      os << buf;
    }
  if (!os) throw IoError("write failed: " + path);
}

}  // namespace nilsym::gauss
