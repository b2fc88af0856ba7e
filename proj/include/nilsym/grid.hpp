#pragma once

// Rectangular node grids, node fields and finite-difference Wirtinger operators.
//
// Convention used throughout the library:
//   d/dz    = (d/dx - i d/dy) / 2
//   d/dzbar = (d/dx + i d/dy) / 2
//   d/dz d/dzbar = Laplacian / 4
// Node (i, j) sits at x = xmin + j*hx, y = ymin + i*hy; storage is row-major in i.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <span>
#include <vector>

#include "nilsym/errors.hpp"
#include "nilsym/mat2c.hpp"

namespace nilsym {

struct Grid2D {
  double xmin = -1.0, xmax = 1.0, ymin = -1.0, ymax = 1.0;
  int nx = 9, ny = 9;

  double hx() const { return (xmax - xmin) / (nx - 1); }
  double hy() const { return (ymax - ymin) / (ny - 1); }
  double h() const { return std::max(hx(), hy()); }
  double x(int j) const { return j == nx - 1 ? xmax : xmin + j * hx(); }
  double y(int i) const { return i == ny - 1 ? ymax : ymin + i * hy(); }
  cplx z(int i, int j) const { return {x(j), y(i)}; }
  std::size_t size() const { return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny); }
  std::size_t index(int i, int j) const { return static_cast<std::size_t>(i) * nx + j; }

  bool contains(cplx z, double slack = 0.0) const {
    return z.real() >= xmin - slack && z.real() <= xmax + slack && z.imag() >= ymin - slack &&
           z.imag() <= ymax + slack;
  }

  /// Nodes at distance >= margin (in index units) from every edge.
  bool inside(int i, int j, int margin) const {
    return i >= margin && j >= margin && i < ny - margin && j < nx - margin;
  }

  friend bool operator==(const Grid2D&, const Grid2D&) = default;
};

template <class T>
class NodeField {
 public:
  NodeField() = default;
  explicit NodeField(Grid2D grid, T fill = T{}) : grid_(grid), data_(grid.size(), fill) {}

  const Grid2D& grid() const { return grid_; }
  T& operator()(int i, int j) { return data_[grid_.index(i, j)]; }
  const T& operator()(int i, int j) const { return data_[grid_.index(i, j)]; }
  std::span<T> values() { return data_; }
  std::span<const T> values() const { return data_; }

 private:
  Grid2D grid_{};
  std::vector<T> data_;
};

inline double magnitude(double v) { return std::abs(v); }
inline double magnitude(cplx v) { return std::abs(v); }
inline double magnitude(const Mat2C& m) { return m.max_abs(); }

/// Max over nodes at least `margin` away from the boundary. NaN entries are skipped.
template <class T>
double max_norm(const NodeField<T>& f, int margin) {
  double m = 0.0;
  const auto& g = f.grid();
  for (int i = margin; i < g.ny - margin; ++i)
    for (int j = margin; j < g.nx - margin; ++j) {
      const double v = magnitude(f(i, j));
      if (!std::isnan(v)) m = std::max(m, v);
    }
  return m;
}

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

template <class T>
T nan_value() {
  if constexpr (std::is_same_v<T, double>) {
    return kNaN;
  } else if constexpr (std::is_same_v<T, cplx>) {
    return {kNaN, kNaN};
  } else {
    return T{cplx{kNaN, kNaN}, cplx{kNaN, kNaN}, cplx{kNaN, kNaN}, cplx{kNaN, kNaN}};
  }
}

/// Local first and second partial derivatives at an interior node by central differences.
template <class T>
struct Partials {
  T value{}, x{}, y{}, xx{}, yy{}, xy{};

  auto dz() const { return 0.5 * (x - kI * y); }
  auto dzbar() const { return 0.5 * (x + kI * y); }
  auto dzdz() const { return 0.25 * (xx - yy - 2.0 * kI * xy); }
  T dzdzbar() const { return 0.25 * (xx + yy); }
};

template <class T>
Partials<T> partials_at(const NodeField<T>& f, int i, int j) {
  const auto& g = f.grid();
  const double hx = g.hx(), hy = g.hy();
  Partials<T> p;
  p.value = f(i, j);
  p.x = (f(i, j + 1) - f(i, j - 1)) * (0.5 / hx);
  p.y = (f(i + 1, j) - f(i - 1, j)) * (0.5 / hy);
  p.xx = (f(i, j + 1) - 2.0 * f(i, j) + f(i, j - 1)) * (1.0 / (hx * hx));
  p.yy = (f(i + 1, j) - 2.0 * f(i, j) + f(i - 1, j)) * (1.0 / (hy * hy));
  p.xy = (f(i + 1, j + 1) - f(i + 1, j - 1) - f(i - 1, j + 1) + f(i - 1, j - 1)) * (0.25 / (hx * hy));
  return p;
}

namespace detail {
template <class T, class Op>
auto map_interior(const NodeField<T>& f, Op op) {
  using R = decltype(op(f, 0, 0));
  NodeField<R> out(f.grid(), nan_value<R>());
  const auto& g = f.grid();
  for (int i = 1; i < g.ny - 1; ++i)
    for (int j = 1; j < g.nx - 1; ++j) out(i, j) = op(f, i, j);
  return out;
}
}  // namespace detail

/// Central-difference d/dz; boundary nodes are NaN.
template <class T>
auto grid_dz(const NodeField<T>& f) {
  return detail::map_interior(f, [](const NodeField<T>& a, int i, int j) {
    const auto& g = a.grid();
    const auto dx = (a(i, j + 1) - a(i, j - 1)) * (0.5 / g.hx());
    const auto dy = (a(i + 1, j) - a(i - 1, j)) * (0.5 / g.hy());
    return 0.5 * (dx - kI * dy);
  });
}

template <class T>
auto grid_dzbar(const NodeField<T>& f) {
  return detail::map_interior(f, [](const NodeField<T>& a, int i, int j) {
    const auto& g = a.grid();
    const auto dx = (a(i, j + 1) - a(i, j - 1)) * (0.5 / g.hx());
    const auto dy = (a(i + 1, j) - a(i - 1, j)) * (0.5 / g.hy());
    return 0.5 * (dx + kI * dy);
  });
}

/// Five-point Laplacian divided by four, i.e. d/dz d/dzbar.
template <class T>
auto grid_dzdzbar(const NodeField<T>& f) {
  return detail::map_interior(f, [](const NodeField<T>& a, int i, int j) {
    const auto& g = a.grid();
    const double hx = g.hx(), hy = g.hy();
    return 0.25 * ((a(i, j + 1) - 2.0 * a(i, j) + a(i, j - 1)) * (1.0 / (hx * hx)) +
                   (a(i + 1, j) - 2.0 * a(i, j) + a(i - 1, j)) * (1.0 / (hy * hy)));
  });
}

}  // namespace nilsym
