#pragma once

// Potential data (Q0, rho0) feeding the Lax system and the integrability test
//   (log rho0)_{z zbar} = rho0/8 - 2|Q0|^2/rho0,   (Q0)_{zbar} = 0.

#include <cmath>
#include <complex>
#include <memory>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "nilsym/errors.hpp"
#include "nilsym/grid.hpp"

namespace nilsym {

/// Complex polynomial in z, coefficients in increasing degree. Holomorphic by construction.
class HolomorphicPolynomial {
 public:
  static constexpr std::size_t kMaxDegree = 8;

  HolomorphicPolynomial() = default;
  explicit HolomorphicPolynomial(std::vector<cplx> coeffs) : coeffs_(std::move(coeffs)) {
    if (coeffs_.size() > kMaxDegree + 1) throw DomainError("Q0 polynomial degree exceeds 8");
    for (const auto& c : coeffs_)
      if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) throw DomainError("Q0 coefficient not finite");
  }

  cplx operator()(cplx z) const {
    cplx acc = 0.0;
    for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * z + *it;
    return acc;
  }

  HolomorphicPolynomial derivative() const {
    std::vector<cplx> d;
    for (std::size_t k = 1; k < coeffs_.size(); ++k) d.push_back(coeffs_[k] * static_cast<double>(k));
    return HolomorphicPolynomial(std::move(d));
  }

  bool is_zero() const {
    for (const auto& c : coeffs_)
      if (c != 0.0) return false;
    return true;
  }

  const std::vector<cplx>& coeffs() const { return coeffs_; }
  friend bool operator==(const HolomorphicPolynomial&, const HolomorphicPolynomial&) = default;

 private:
  std::vector<cplx> coeffs_;
};

namespace rho0 {

struct Constant {
  double value = 1.0;
  friend bool operator==(const Constant&, const Constant&) = default;
};

/// rho0 = 16 / (1 - |z|^2)^2, the Q0 = 0 solution on the unit disk.
struct Liouville {
  friend bool operator==(const Liouville&, const Liouville&) = default;
};

/// u = log rho0 sampled on a solver grid, bilinearly interpolated.
struct Solved {
  std::shared_ptr<const NodeField<double>> log_rho;
  friend bool operator==(const Solved& a, const Solved& b) { return a.log_rho == b.log_rho; }
};

using Source = std::variant<Constant, Liouville, Solved>;

}  // namespace rho0

struct PotentialSpec {
  HolomorphicPolynomial Q0;
  rho0::Source rho0_source = rho0::Constant{};

  /// Throws DomainError for combinations that can never be admissible.
  void validate() const {
    if (const auto* c = std::get_if<rho0::Constant>(&rho0_source); c && !(c->value > 0.0))
      throw DomainError("constant rho0 must be positive");
    if (std::holds_alternative<rho0::Liouville>(rho0_source) && !Q0.is_zero())
      throw DomainError("liouville rho0 requires Q0 = 0");
    if (const auto* s = std::get_if<rho0::Solved>(&rho0_source); s && !s->log_rho)
      throw DomainError("solved rho0 source has no grid");
  }
};

inline PotentialSpec constant_potential(double rho, std::vector<cplx> q0) {
  return {HolomorphicPolynomial(std::move(q0)), rho0::Constant{rho}};
}

inline PotentialSpec liouville_potential() { return {HolomorphicPolynomial{}, rho0::Liouville{}}; }

inline PotentialSpec solved_potential(NodeField<double> log_rho, std::vector<cplx> q0) {
  return {HolomorphicPolynomial(std::move(q0)),
          rho0::Solved{std::make_shared<const NodeField<double>>(std::move(log_rho))}};
}

/// Closed-form Liouville conformal factor 16/(1-|z|^2)^2.
inline double liouville_exact(cplx z) {
  const double r2 = std::norm(z);
  if (!(r2 < 1.0)) throw DomainError("liouville_exact: |z| >= 1");
  const double d = 1.0 - r2;
  return 16.0 / (d * d);
}

namespace detail {

inline double bilinear(const NodeField<double>& u, cplx z) {
  const Grid2D& g = u.grid();
  const double scale = std::max({std::abs(g.xmin), std::abs(g.xmax), std::abs(g.ymin), std::abs(g.ymax), 1.0});
  if (!g.contains(z, 1e-12 * scale)) throw DomainError("rho0: point outside the solver grid");
  const double sx = std::clamp((z.real() - g.xmin) / g.hx(), 0.0, static_cast<double>(g.nx - 1));
  const double sy = std::clamp((z.imag() - g.ymin) / g.hy(), 0.0, static_cast<double>(g.ny - 1));
  int j = std::min(static_cast<int>(std::floor(sx)), g.nx - 2);
  int i = std::min(static_cast<int>(std::floor(sy)), g.ny - 2);
  double fx = sx - j, fy = sy - i;
  // Snap to nodes so that node queries reproduce stored values bit for bit.
  if (std::abs(fx) < 1e-9) fx = 0.0;
  if (std::abs(fy) < 1e-9) fy = 0.0;
  if (std::abs(fx - 1.0) < 1e-9) { fx = 0.0; ++j; }
  if (std::abs(fy - 1.0) < 1e-9) { fy = 0.0; ++i; }
  auto at = [&](int ii, int jj) { return u(std::min(ii, g.ny - 1), std::min(jj, g.nx - 1)); };
  double v = at(i, j);
  if (fx != 0.0 || fy != 0.0)
    v = (1 - fy) * ((1 - fx) * at(i, j) + fx * at(i, j + 1)) + fy * ((1 - fx) * at(i + 1, j) + fx * at(i + 1, j + 1));
  return v;
}

/// Samples u at z +- h in both directions; throws when the stencil leaves the grid.
struct Stencil {
  double c, e, w, n, s;
};

inline Stencil stencil(const NodeField<double>& u, cplx z) {
  const Grid2D& g = u.grid();
  const double hx = g.hx(), hy = g.hy();
  const double tol = 1e-9 * g.h();
  if (z.real() - hx < g.xmin - tol || z.real() + hx > g.xmax + tol || z.imag() - hy < g.ymin - tol ||
      z.imag() + hy > g.ymax + tol)
    throw DomainError("rho0: derivative stencil reaches outside the solver grid (boundary node)");
  return {bilinear(u, z), bilinear(u, z + hx), bilinear(u, z - hx), bilinear(u, z + cplx(0, hy)),
          bilinear(u, z - cplx(0, hy))};
}

}  // namespace detail

inline cplx eval_Q0(const PotentialSpec& spec, cplx z) { return spec.Q0(z); }

inline double eval_rho0(const PotentialSpec& spec, cplx z) {
  return std::visit(
      [&](const auto& src) -> double {
        using S = std::decay_t<decltype(src)>;
        if constexpr (std::is_same_v<S, rho0::Constant>) {
          return src.value;
        } else if constexpr (std::is_same_v<S, rho0::Liouville>) {
          return liouville_exact(z);
        } else {
          const double u = detail::bilinear(*src.log_rho, z);
          const double r = std::exp(u);
          if (!(r > 0.0) || !std::isfinite(r)) throw DomainError("rho0: non-positive or non-finite interpolated value");
          return r;
        }
      },
      spec.rho0_source);
}

/// (log rho0)_z. Solved sources use central differences at the solver spacing.
inline cplx eval_dlogrho0_dz(const PotentialSpec& spec, cplx z) {
  return std::visit(
      [&](const auto& src) -> cplx {
        using S = std::decay_t<decltype(src)>;
        if constexpr (std::is_same_v<S, rho0::Constant>) {
          return 0.0;
        } else if constexpr (std::is_same_v<S, rho0::Liouville>) {
          const double r2 = std::norm(z);
          if (!(r2 < 1.0)) throw DomainError("liouville rho0: |z| >= 1");
          return 2.0 * std::conj(z) / (1.0 - r2);
        } else {
          const auto& g = src.log_rho->grid();
          const auto st = detail::stencil(*src.log_rho, z);
          const double ux = (st.e - st.w) / (2.0 * g.hx());
          const double uy = (st.n - st.s) / (2.0 * g.hy());
          return 0.5 * cplx(ux, -uy);
        }
      },
      spec.rho0_source);
}

/// (log rho0)_{z zbar}, used only by the integrability residual.
inline double eval_dlogrho0_dzdzbar(const PotentialSpec& spec, cplx z) {
  return std::visit(
      [&](const auto& src) -> double {
        using S = std::decay_t<decltype(src)>;
        if constexpr (std::is_same_v<S, rho0::Constant>) {
          return 0.0;
        } else if constexpr (std::is_same_v<S, rho0::Liouville>) {
          const double d = 1.0 - std::norm(z);
          if (!(d > 0.0)) throw DomainError("liouville rho0: |z| >= 1");
          return 2.0 / (d * d);
        } else {
          const auto& g = src.log_rho->grid();
          const auto st = detail::stencil(*src.log_rho, z);
          const double hx = g.hx(), hy = g.hy();
          return 0.25 * ((st.e - 2.0 * st.c + st.w) / (hx * hx) + (st.n - 2.0 * st.c + st.s) / (hy * hy));
        }
      },
      spec.rho0_source);
}

struct IntegrabilityResidual {
  cplx gauss;       ///< (log rho0)_{z zbar} - rho0/8 + 2|Q0|^2/rho0
  cplx holomorphy;  ///< (Q0)_{zbar}
};

inline IntegrabilityResidual integrability_residual(const PotentialSpec& spec, cplx z) {
  const double rho = eval_rho0(spec, z);
  const double q2 = std::norm(spec.Q0(z));
  // Q0 is a polynomial in z alone, so its zbar-derivative vanishes identically.
  return {eval_dlogrho0_dzdzbar(spec, z) - rho / 8.0 + 2.0 * q2 / rho, 0.0};
}

/// Max over interior grid nodes of both integrability components.
inline double max_integrability_residual(const PotentialSpec& spec, const Grid2D& grid) {
  double m = 0.0;
  for (int i = 1; i < grid.ny - 1; ++i)
    for (int j = 1; j < grid.nx - 1; ++j) {
      const auto r = integrability_residual(spec, grid.z(i, j));
      m = std::max({m, std::abs(r.gauss), std::abs(r.holomorphy)});
    }
  return m;
}

/// Checks the integration domain against the potential: size, z = 0 interior, disk containment.
inline void validate_domain(const Grid2D& g, const PotentialSpec& spec) {
  if (g.nx < 9 || g.ny < 9) throw DomainError("domain needs at least 9 nodes per direction");
  if (!(g.xmin < 0.0 && g.xmax > 0.0 && g.ymin < 0.0 && g.ymax > 0.0))
    throw DomainError("domain must contain z = 0 in its interior");
  if (std::holds_alternative<rho0::Liouville>(spec.rho0_source)) {
    for (double x : {g.xmin, g.xmax})
      for (double y : {g.ymin, g.ymax})
        if (!(x * x + y * y < 1.0)) throw DomainError("liouville rho0 requires the domain inside the unit disk");
  }
}

}  // namespace nilsym
