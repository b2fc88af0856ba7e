#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "nilsym/lax_frame.hpp"
#include "oracles.hpp"

using namespace nilsym;
using namespace nilsym::lax;

namespace {

const PotentialSpec kConstant = constant_potential(1.0, {0.25});

double frame_error_vs_expm(const PotentialSpec& spec, const Grid2D& g, double t) {
  const auto ff = integrate_grid(spec, g, t);
  double m = 0.0;
  for (int i = 0; i < g.ny; ++i)
    for (int j = 0; j < g.nx; ++j) {
      const auto c = connection_at(spec, g.z(i, j), t);
      const cplx z = g.z(i, j), zb = std::conj(z);
      const auto jet = oracle::expm_jet(c.U * z + c.V * zb, c.Ut * z + c.Vt * zb, c.Utt * z + c.Vtt * zb);
      const auto& f = ff.frames(i, j);
      m = std::max({m, max_abs_diff(f.psi, jet.value), max_abs_diff(f.psi_t, jet.d1), max_abs_diff(f.psi_tt, jet.d2)});
    }
  return m;
}

}  // namespace

TEST(LaxConnection, ConstantPotentialValues) {
  const auto c = connection_at(kConstant, cplx(0.3, -0.2), 0.0);
  const Mat2C expect{0.0, 0.25 * kI, -0.25 * kI, 0.0};
  EXPECT_LT(max_abs_diff(c.U, expect), 1e-15);
  EXPECT_LT(max_abs_diff(c.V, expect), 1e-15);
  const auto c2 = connection_at(kConstant, 0.0, std::numbers::pi / 4);
  EXPECT_NEAR(std::abs(c2.U.m21 - 0.25), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(c2.V.m12 - 0.25), 0.0, 1e-15);
}

TEST(LaxConnection, TracelessAndExactTDerivatives) {
  const auto spec = constant_potential(2.0, {cplx(0.1, 0.2), cplx(0.3, -0.1), 0.2});
  const double eps = 1e-4;
  for (int n = 0; n < 30; ++n) {
    const cplx z = oracle::uniform_c(0.8);
    const double t = oracle::uniform(0, 3);
    const auto c = connection_at(spec, z, t), p = connection_at(spec, z, t + eps), m = connection_at(spec, z, t - eps);
    EXPECT_LT(std::abs(c.U.trace()), 1e-15);
    EXPECT_LT(std::abs(c.V.trace()), 1e-15);
    EXPECT_LT(max_abs_diff(c.Ut, (p.U - m.U) / (2 * eps)), 1e-7);
    EXPECT_LT(max_abs_diff(c.Vt, (p.V - m.V) / (2 * eps)), 1e-7);
    EXPECT_LT(max_abs_diff(c.Utt, (p.U - 2.0 * c.U + m.U) / (eps * eps)), 1e-5);
    EXPECT_LT(max_abs_diff(c.Vtt, (p.V - 2.0 * c.V + m.V) / (eps * eps)), 1e-5);
    EXPECT_LT(std::abs(c.Ut.m21 - 2.0 * kI * c.U.m21), 1e-15);
  }
}

TEST(LaxConnection, FlatnessOfAdmissibleAndInadmissibleData) {
  const cplx z(0.2, 0.1);
  EXPECT_LT(flatness_residual(kConstant, z, 0.7, 1e-4).max_abs(), 1e-10);
  EXPECT_LT(flatness_residual(liouville_potential(), z, 0.7, 1e-4).max_abs(), 1e-6);
  EXPECT_LT(flatness_residual(constant_potential(4.0, {cplx(0, 1)}), z, 0.3, 1e-4).max_abs(), 1e-10);
  const double bad = flatness_residual(constant_potential(1.0, {}), z, 0.0, 1e-4).max_abs();
  EXPECT_NEAR(bad, 1.0 / 16.0, 1e-10);
  EXPECT_THROW(integrate_grid(constant_potential(1.0, {}), Grid2D{-1, 1, -1, 1, 9, 9}, 0.0), NonFlatInput);
}

TEST(LaxFrame, RK4StepMatchesExponentialForConstantConnection) {
  const auto c = connection_at(kConstant, 0.0, 0.4);
  const cplx dz(0.05, -0.02);
  const auto f = rk4_step(FrameTriple{}, c, c, c, dz);
  // Local error of one step is about |dz U|^5 / 120, roughly 1e-10 here.
  const auto jet = oracle::expm_jet(c.U * dz + c.V * std::conj(dz), c.Ut * dz + c.Vt * std::conj(dz),
                                    c.Utt * dz + c.Vtt * std::conj(dz));
  EXPECT_LT(max_abs_diff(f.psi, jet.value), 5e-10);
  EXPECT_LT(max_abs_diff(f.psi_t, jet.d1), 5e-10);
  EXPECT_LT(max_abs_diff(f.psi_tt, jet.d2), 2e-9);
}

TEST(LaxFrame, GridMatchesExponentialOracle) {
  for (double t : {0.0, 0.6, std::numbers::pi / 2}) {
    EXPECT_LT(frame_error_vs_expm(kConstant, Grid2D{-1, 1, -1, 1, 65, 65}, t), 2e-9);
    // Origin between nodes: one extra step reaches the first node.
    EXPECT_LT(frame_error_vs_expm(kConstant, Grid2D{-1, 1, -0.9, 1.2, 24, 20}, t), 1e-6);
  }
}

TEST(LaxFrame, DeterminantStaysOne) {
  const auto ff = integrate_grid(liouville_potential(), Grid2D{-0.5, 0.5, -0.5, 0.5, 33, 33}, 0.3);
  EXPECT_LT(ff.max_det_deviation, 1e-8);
  EXPECT_EQ(ff.frames(16, 16).psi, Mat2C::identity());
  EXPECT_EQ(ff.frames(16, 16).psi_t, Mat2C::zero());
}

TEST(LaxFrame, PathIndependenceImprovesAtFourthOrder) {
  const auto spec = liouville_potential();
  double prev = 0.0;
  for (int n : {17, 33, 65}) {
    const Grid2D g{-0.4, 0.4, -0.4, 0.4, n, n};
    IntegrationOptions col;
    col.order = PropagationOrder::ColumnFirst;
    const auto a = integrate_grid(spec, g, 0.2), b = integrate_grid(spec, g, 0.2, col);
    double d = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) d = std::max(d, max_abs_diff(a.frames(i, j).psi, b.frames(i, j).psi));
    if (prev > 0.0) { EXPECT_GE(std::log2(prev / d), 3.5); }
    prev = d;
  }
  EXPECT_LT(prev, 1e-8);
}

TEST(LaxFrame, PeriodicInT) {
  const Grid2D g{-0.4, 0.4, -0.4, 0.4, 17, 17};
  const auto a = integrate_grid(liouville_potential(), g, 0.3);
  const auto b = integrate_grid(liouville_potential(), g, 0.3 + std::numbers::pi);
  for (int i = 0; i < g.ny; ++i)
    for (int j = 0; j < g.nx; ++j) {
      EXPECT_LT(max_abs_diff(a.frames(i, j).psi, b.frames(i, j).psi), 1e-12);
      EXPECT_LT(max_abs_diff(a.frames(i, j).psi_t, b.frames(i, j).psi_t), 1e-12);
    }
}
