// Acceptance suite. Usage: acceptance [criterion ...]; no arguments runs all eight.
// Prints one PASS/FAIL line per criterion and exits nonzero if any selected criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "nilsym/nilsym.hpp"
#include "oracles.hpp"
#include "temp_dir.hpp"

using namespace nilsym;

namespace {

// Pinned tolerances.
constexpr double kFrameTol = 1e-9;           // criterion 1, Psi
constexpr double kFrameDerivTol = 1e-7;      // criterion 1, d/dt and d2/dt2 Psi
constexpr double kFrameRuntime = 5.0;        // seconds
constexpr double kMinOrder = 1.8;            // criteria 2 and 6
constexpr double kResidualCap = 1e-3;        // criterion 2, at 129^2
constexpr double kOrderFloor = 1e-9;         // residuals below this count as converged
constexpr double kRefinementInset = 0.125;   // two-node margin of the 33^2 grid on [-1, 1]
constexpr double kRegressionRuntime = 60.0;
constexpr double kSoundTol = 1e-10;          // criterion 3
constexpr double kLiouvilleErr = 5e-4;       // criterion 4
constexpr double kLiouvilleOrderLo = 1.7, kLiouvilleOrderHi = 2.3;
constexpr int kLiouvilleNewton = 8;
constexpr double kLiouvilleRuntime = 30.0;
constexpr double kDetTol = 1e-8;             // criterion 5
constexpr double kShapeTol = 1e-6;
constexpr double kPeriodTol = 1e-12;
constexpr double kPathTol = 1e-8;
constexpr double kPathOrder = 4.0;           // compared after rounding the estimate to one decimal
constexpr double kPathFloor = 1e-12;         // discrepancies at roundoff level carry no order information
constexpr double kIsometryC = 2.0;           // criterion 6, |rho_0 - rho_{pi/2}| <= C h^2
constexpr double kKernelTol = 1e-12;         // criterion 7

const std::vector<double> kTs{0.0, std::numbers::pi / 4, std::numbers::pi / 2};
const std::vector<int> kLevels{33, 65, 129};

const PotentialSpec kConstant = constant_potential(1.0, {0.25});
const HolomorphicPolynomial kLinearQ0({0.0, 0.25});

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct Outcome {
  bool pass = true;
  std::vector<std::string> lines;

  template <class... Args>
  void check(bool ok, const char* fmt, Args... args) {
    char buf[512];
    if constexpr (sizeof...(Args) == 0)
      std::snprintf(buf, sizeof buf, "%s", fmt);
    else
      std::snprintf(buf, sizeof buf, fmt, args...);
    lines.push_back(std::string(ok ? "  ok    " : "  FAIL  ") + buf);
    pass = pass && ok;
  }

  /// Measured context that is reported but not asserted.
  void note(const std::string& text) { lines.push_back("  info  " + text); }
};

/// log2 ratio of successive refinements, with values under the floor treated as converged.
bool order_ok(double coarse, double fine, double min_order) {
  if (fine <= kOrderFloor) return true;
  return std::log2(coarse / fine) >= min_order;
}

double order_of(double coarse, double fine) { return std::log2(coarse / fine); }

// ---------------------------------------------------------------------------

Outcome criterion1() {
  Outcome out;
  const auto t0 = std::chrono::steady_clock::now();
  const Grid2D g{-1, 1, -1, 1, 65, 65};
  for (double t : kTs) {
    const auto ff = lax::integrate_grid(kConstant, g, t);
    double e0 = 0, e1 = 0, e2 = 0;
    for (int i = 0; i < g.ny; ++i)
      for (int j = 0; j < g.nx; ++j) {
        const cplx z = g.z(i, j), zb = std::conj(z);
        const auto c = lax::connection_at(kConstant, z, t);
        const Mat2C M = c.U * z + c.V * zb, Mt = c.Ut * z + c.Vt * zb, Mtt = c.Utt * z + c.Vtt * zb;
        const auto& f = ff.frames(i, j);
        e0 = std::max(e0, max_abs_diff(f.psi, oracle::expm(M)));
        e1 = std::max(e1, max_abs_diff(f.psi_t, oracle::expm_frechet(M, Mt)));
        e2 = std::max(e2, max_abs_diff(f.psi_tt, oracle::expm_jet(M, Mt, Mtt).d2));
      }
    out.check(e0 <= kFrameTol, "t=%.4f  max|Psi - exp|      = %.3e (<= %.0e)", t, e0, kFrameTol);
    out.check(e1 <= kFrameDerivTol, "t=%.4f  max|Psi_t - 2-block|  = %.3e (<= %.0e)", t, e1, kFrameDerivTol);
    out.check(e2 <= kFrameDerivTol, "t=%.4f  max|Psi_tt - 3-block| = %.3e (<= %.0e)", t, e2, kFrameDerivTol);
  }
  const double rt = seconds_since(t0);
  out.check(rt < kFrameRuntime, "runtime %.2f s (< %.0f s)", rt, kFrameRuntime);
  return out;
}

// ---------------------------------------------------------------------------

PotentialSpec solved_linear_potential(const Grid2D& g) {
  const Grid2D sg = gauss::padded_solver_grid(g, 2, 0.0625);
  const auto sol = gauss::newton_solve_from_bc(kLinearQ0, NodeField<double>(sg, 0.0));
  return solved_potential(sol.u, kLinearQ0.coeffs());
}

std::vector<std::pair<const char*, double>> residuals(const verify::MaxNorms& m) {
  return {{"conformality", m.conformality}, {"R1", m.R1},
          {"R2", m.R2},                     {"covariant", m.covariant},
          {"A_consistency", m.A_consistency.value_or(NAN)}, {"Q_holomorphy", m.Q_holomorphy},
          {"tension", m.tension}};
}

void refinement_study(Outcome& out, const char* label, const std::function<PotentialSpec(const Grid2D&)>& make,
                      double t) {
  std::vector<verify::MaxNorms> norms;
  for (int n : kLevels) {
    const Grid2D g{-1, 1, -1, 1, n, n};
    const auto s = sym::surface_at(make(g), g, t);
    verify::VerifyOptions opts;
    opts.inset = kRefinementInset;
    norms.push_back(verify::verify_surface(verify::from_sym(s), opts).max);
  }
  const auto r0 = residuals(norms[0]), r1 = residuals(norms[1]), r2 = residuals(norms[2]);
  for (std::size_t k = 0; k < r0.size(); ++k) {
    const double a = r0[k].second, b = r1[k].second, c = r2[k].second;
    const bool ok = std::isfinite(c) && order_ok(a, b, kMinOrder) && order_ok(b, c, kMinOrder) && c <= kResidualCap;
    out.check(ok, "%-8s t=%.4f %-13s %.3e  %.3e  %.3e  orders %.2f %.2f", label, t, r0[k].first, a, b, c,
              order_of(a, b), order_of(b, c));
  }
}

Outcome criterion2() {
  Outcome out;
  const auto t0 = std::chrono::steady_clock::now();
  for (double t : kTs) refinement_study(out, "constant", [](const Grid2D&) { return kConstant; }, t);
  refinement_study(out, "solved", solved_linear_potential, 0.0);
  const double rt = seconds_since(t0);
  out.check(rt < kRegressionRuntime, "runtime %.2f s (< %.0f s)", rt, kRegressionRuntime);
  return out;
}

// ---------------------------------------------------------------------------

verify::DiscreteSurface plane(bool vertical) {
  const Grid2D g{-1, 1, -1, 1, 33, 33};
  verify::DiscreteSurface s{NodeField<cplx>(g), NodeField<double>(g), std::nullopt};
  for (int i = 0; i < g.ny; ++i)
    for (int j = 0; j < g.nx; ++j) {
      s.F(i, j) = vertical ? cplx(g.x(j), 0) : g.z(i, j);
      s.h(i, j) = vertical ? g.y(i) : 0.0;
    }
  return s;
}

Outcome criterion3() {
  Outcome out;
  const auto vert = verify::verify_surface(plane(true));
  for (const auto& [name, v] : residuals(vert.max)) {
    if (std::isnan(v)) continue;  // A_consistency needs hhat, which a hand-built plane does not carry
    out.check(v <= kSoundTol, "vertical plane   %-13s %.3e (<= %.0e)", name, v, kSoundTol);
  }
  out.check(vert.gauss_skipped == vert.nodes_checked, "vertical plane   phi = 0 everywhere, tension skipped on %d nodes",
            vert.gauss_skipped);
  pipeline::CheckOptions co;
  out.check(pipeline::run_check(plane(true), co).exit_code == pipeline::kPass, "vertical plane   check exit 0");

  const verify::DiscreteSurface hp = plane(false);
  const auto hor = verify::verify_surface(hp);
  const Grid2D& g = hp.grid();
  double dev = 0.0;
  for (int i = 1; i < g.ny - 1; ++i)
    for (int j = 1; j < g.nx - 1; ++j) dev = std::max(dev, std::abs(hor.R1(i, j) + g.z(i, j) / 8.0));
  out.check(dev <= kSoundTol, "horizontal plane max|R1 + z/8| = %.3e (<= %.0e)", dev, kSoundTol);
  const int code = pipeline::run_check(hp, co).exit_code;
  out.check(code == pipeline::kResidualFailure, "horizontal plane rejected, check exit %d", code);
  return out;
}

// ---------------------------------------------------------------------------

Outcome criterion4() {
  Outcome out;
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<double> errs;
  for (int n : kLevels) {
    const Grid2D g{-0.6, 0.6, -0.6, 0.6, n, n};
    const auto bc = gauss::sample_boundary(g, [](cplx z) { return std::log(liouville_exact(z)); });
    const auto sol = gauss::newton_solve_from_bc(HolomorphicPolynomial{}, bc);
    double uerr = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) uerr = std::max(uerr, std::abs(sol.u(i, j) - std::log(liouville_exact(g.z(i, j)))));
    errs.push_back(uerr);
    out.check(sol.iterations <= kLiouvilleNewton, "n=%3d  Newton iterations %d (<= %d), max|u - log rho| %.3e", n,
              sol.iterations, kLiouvilleNewton, uerr);
  }
  out.check(errs.back() <= kLiouvilleErr, "max error at h = 1.2/128: %.3e (<= %.0e)", errs.back(), kLiouvilleErr);
  for (std::size_t k = 1; k < errs.size(); ++k) {
    const double p = order_of(errs[k - 1], errs[k]);
    out.check(p >= kLiouvilleOrderLo && p <= kLiouvilleOrderHi, "observed order %d->%d: %.3f (in [%.1f, %.1f])",
              kLevels[k - 1], kLevels[k], p, kLiouvilleOrderLo, kLiouvilleOrderHi);
  }
  const double rt = seconds_since(t0);
  out.check(rt < kLiouvilleRuntime, "runtime %.2f s (< %.0f s)", rt, kLiouvilleRuntime);
  return out;
}

// ---------------------------------------------------------------------------

double path_discrepancy(const PotentialSpec& spec, const Grid2D& g, double t) {
  lax::IntegrationOptions col;
  col.order = lax::PropagationOrder::ColumnFirst;
  const auto a = lax::integrate_grid(spec, g, t), b = lax::integrate_grid(spec, g, t, col);
  double d = 0.0;
  for (int i = 0; i < g.ny; ++i)
    for (int j = 0; j < g.nx; ++j) {
      const auto &fa = a.frames(i, j), &fb = b.frames(i, j);
      d = std::max({d, max_abs_diff(fa.psi, fb.psi), max_abs_diff(fa.psi_t, fb.psi_t),
                    max_abs_diff(fa.psi_tt, fb.psi_tt)});
    }
  return d;
}

Outcome criterion5() {
  Outcome out;
  struct Case {
    const char* name;
    PotentialSpec spec;
    double half;
  };
  const std::vector<Case> cases{{"constant", kConstant, 1.0}, {"liouville", liouville_potential(), 0.4}};
  for (const auto& c : cases) {
    const Grid2D g{-c.half, c.half, -c.half, c.half, 65, 65};
    for (double t : kTs) {
      const auto s = sym::surface_at(c.spec, g, t);
      const auto base = s.point(32, 32);
      out.check(s.frames.max_det_deviation <= kDetTol, "%-9s t=%.4f max|det Psi - 1| %.3e (<= %.0e)", c.name, t,
                s.frames.max_det_deviation, kDetTol);
      out.check(s.fhat_shape_defect <= kShapeTol && s.ft_shape_defect <= kShapeTol,
                "%-9s t=%.4f shape defects fhat %.3e, f_t %.3e (<= %.0e)", c.name, t, s.fhat_shape_defect,
                s.ft_shape_defect, kShapeTol);
      out.check(base.x1 == 0.0 && base.x2 == 0.0 && base.x3 == 0.0, "%-9s t=%.4f f_t(0) = (%g, %g, %g)", c.name, t,
                base.x1, base.x2, base.x3);
      const auto sp = sym::surface_at(c.spec, g, t + std::numbers::pi);
      double per = 0.0;
      for (int i = 0; i < g.ny; ++i)
        for (int j = 0; j < g.nx; ++j) {
          const auto p = s.point(i, j), q = sp.point(i, j);
          per = std::max({per, std::abs(p.x1 - q.x1), std::abs(p.x2 - q.x2), std::abs(p.x3 - q.x3)});
        }
      out.check(per <= kPeriodTol, "%-9s t=%.4f max|f_t - f_{t+pi}| %.3e (<= %.0e)", c.name, t, per, kPeriodTol);
    }
    std::vector<double> d;
    for (int n : {17, 33, 65}) d.push_back(path_discrepancy(c.spec, Grid2D{-c.half, c.half, -c.half, c.half, n, n}, 0.3));
    out.check(d.back() <= kPathTol, "%-9s path discrepancy at 65^2 %.3e (<= %.0e)", c.name, d.back(), kPathTol);
    for (std::size_t k = 1; k < d.size(); ++k) {
      const double p = order_of(d[k - 1], d[k]);
      if (d[k] <= kPathFloor) {
        out.check(true, "%-9s path discrepancy %.3e -> %.3e, at roundoff (<= %.0e)", c.name, d[k - 1], d[k], kPathFloor);
        continue;
      }
      out.check(std::round(10.0 * p) / 10.0 >= kPathOrder, "%-9s path discrepancy %.3e -> %.3e, order %.3f (>= %.0f)",
                c.name, d[k - 1], d[k], p, kPathOrder);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

double shared_node_max(const NodeField<Mat2C>& r) {
  const Grid2D& g = r.grid();
  const int stride = (g.nx - 1) / 16;
  double m = 0.0;
  for (int i = 2 * stride; i < g.ny - 2 * stride; i += stride)
    for (int j = 2 * stride; j < g.nx - 2 * stride; j += stride) m = std::max(m, r(i, j).max_abs());
  return m;
}

Outcome criterion6() {
  Outcome out;
  for (int n : kLevels) {
    const Grid2D g{-1, 1, -1, 1, n, n};
    verify::VerifyOptions opts;
    opts.inset = kRefinementInset;
    const auto r0 = verify::verify_surface(verify::from_sym(sym::surface_at(kConstant, g, 0.0)), opts);
    const auto r1 = verify::verify_surface(verify::from_sym(sym::surface_at(kConstant, g, std::numbers::pi / 2)), opts);
    double d = 0.0, w0 = 0.0, w1 = 0.0;
    for (int i = 0; i < g.ny; ++i)
      for (int j = 0; j < g.nx; ++j)
        if (verify::checked(r0, i, j)) {
          d = std::max(d, std::abs(r0.rho(i, j) - r1.rho(i, j)));
          const double rho0 = eval_rho0(kConstant, g.z(i, j));
          w0 = std::max(w0, std::abs(r0.rho(i, j) * r0.phi(i, j) * r0.phi(i, j) - rho0));
          w1 = std::max(w1, std::abs(r1.rho(i, j) * r1.phi(i, j) * r1.phi(i, j) - rho0));
        }
    char buf[160];
    std::snprintf(buf, sizeof buf, "n=%3d  max|rho phi^2 - rho0| at t=0: %.3e, at t=pi/2: %.3e", n, w0, w1);
    out.note(buf);
    const double bound = kIsometryC * g.h() * g.h();
    out.check(d <= bound, "n=%3d  max|rho(t=0) - rho(t=pi/2)| %.3e (<= C h^2 = %.3e, C = %.0f)", n, d, bound,
              kIsometryC);
  }
  std::vector<double> id;
  for (int n : kLevels) {
    const auto s = sym::surface_at(kConstant, Grid2D{-1, 1, -1, 1, n, n}, 0.3);
    id.push_back(shared_node_max(sym::commutator_identity_residual(s.fhat)));
  }
  for (std::size_t k = 1; k < id.size(); ++k)
    out.check(order_ok(id[k - 1], id[k], kMinOrder), "fhat_zzbar - (i/4)[fhat_z, fhat_zbar]: %.3e -> %.3e, order %.2f",
              id[k - 1], id[k], order_of(id[k - 1], id[k]));
  return out;
}

// ---------------------------------------------------------------------------

Outcome criterion7() {
  using namespace nil3;
  Outcome out;
  // Frame components and the group law are affine in each argument, so central
  // differences with a unit step are exact up to rounding.
  const double eps = 0.5;
  double ortho = 0.0, l1 = 0.0, frame_inv = 0.0, compat = 0.0, torsion = 0.0;
  for (int n = 0; n < 100; ++n) {
    const Nil3Point p{oracle::uniform(-3, 3), oracle::uniform(-3, 3), oracle::uniform(-3, 3)};
    const Nil3Point q{oracle::uniform(-3, 3), oracle::uniform(-3, 3), oracle::uniform(-3, 3)};
    const auto E = frame_at(p);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) ortho = std::max(ortho, std::abs(metric_at(p, E[i], E[j]) - (i == j ? 1.0 : 0.0)));

    const CoordVec<double> v{oracle::uniform(-1, 1), oracle::uniform(-1, 1), oracle::uniform(-1, 1)};
    const Nil3Point a = group_mul(p, {q.x1 + eps * v[0], q.x2 + eps * v[1], q.x3 + eps * v[2]});
    const Nil3Point b = group_mul(p, {q.x1 - eps * v[0], q.x2 - eps * v[1], q.x3 - eps * v[2]});
    const auto dl = left_translate(p, v);
    l1 = std::max({l1, std::abs(dl[0] - (a.x1 - b.x1) / (2 * eps)), std::abs(dl[1] - (a.x2 - b.x2) / (2 * eps)),
                   std::abs(dl[2] - (a.x3 - b.x3) / (2 * eps))});
    const auto Eq = frame_at(q), Epq = frame_at(group_mul(p, q));
    for (int k = 0; k < 3; ++k) {
      const auto moved = left_translate(p, Eq[k]);
      for (int c = 0; c < 3; ++c) frame_inv = std::max(frame_inv, std::abs(moved[c] - Epq[k][c]));
    }

    // Lie brackets of the frame fields at p.
    auto bracket = [&](int x, int y) {
      auto dir = [&](int field, const CoordVec<double>& d) {
        const auto fp = frame_at({p.x1 + eps * d[0], p.x2 + eps * d[1], p.x3 + eps * d[2]})[field];
        const auto fm = frame_at({p.x1 - eps * d[0], p.x2 - eps * d[1], p.x3 - eps * d[2]})[field];
        return CoordVec<double>{(fp[0] - fm[0]) / (2 * eps), (fp[1] - fm[1]) / (2 * eps), (fp[2] - fm[2]) / (2 * eps)};
      };
      const auto xy = dir(y, E[x]), yx = dir(x, E[y]);
      return to_frame(p, CoordVec<double>{xy[0] - yx[0], xy[1] - yx[1], xy[2] - yx[2]});
    };
    for (int i = 1; i <= 3; ++i)
      for (int j = 1; j <= 3; ++j) {
        const auto br = bracket(i - 1, j - 1);
        for (int k = 1; k <= 3; ++k) {
          torsion = std::max(torsion, std::abs(gamma(i, j)[k - 1] - gamma(j, i)[k - 1] - br[k - 1]));
          compat = std::max(compat, std::abs(gamma(i, j)[k - 1] + gamma(i, k)[j - 1]));
        }
      }
  }
  out.check(ortho <= kKernelTol, "frame orthonormality      %.3e (<= %.0e)", ortho, kKernelTol);
  out.check(l1 <= kKernelTol, "dL_p vs Jacobian of L_p   %.3e (<= %.0e)", l1, kKernelTol);
  out.check(frame_inv <= kKernelTol, "frame left-invariance     %.3e (<= %.0e)", frame_inv, kKernelTol);
  out.check(compat <= kKernelTol, "metric compatibility      %.3e (<= %.0e)", compat, kKernelTol);
  out.check(torsion <= kKernelTol, "torsion vs Lie bracket    %.3e (<= %.0e)", torsion, kKernelTol);
  return out;
}

// ---------------------------------------------------------------------------

Outcome criterion8() {
  Outcome out;
  const std::string config = std::string(NILSYM_CONFIG_DIR) + "/constant.json";
  const io::RunConfig cfg = io::load_config(config);
  testutil::TempDir a("accept_a"), b("accept_b");
  const auto cwd = std::filesystem::current_path();
  for (const auto* dir : {&a, &b}) {
    std::filesystem::current_path(dir->file(""));
    const int code = pipeline::run_pipeline(cfg).exit_code;
    out.check(code == pipeline::kPass, "run in %s exit %d", dir->file("").c_str(), code);
  }
  std::filesystem::current_path(cwd);
  std::vector<std::string> files{cfg.outputs.report};
  for (double t : cfg.t_values) files.push_back(io::expand_pattern(cfg.outputs.mesh, t));
  for (const auto& f : files) {
    const std::string x = testutil::slurp(a.file(f)), y = testutil::slurp(b.file(f));
    out.check(!x.empty() && x == y, "%-28s %zu bytes, identical: %s", f.c_str(), x.size(), x == y ? "yes" : "no");
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::function<Outcome()>> all{criterion1, criterion2, criterion3, criterion4,
                                                  criterion5, criterion6, criterion7, criterion8};
  std::vector<int> selected;
  for (int k = 1; k < argc; ++k) {
    const int n = std::atoi(argv[k]);
    if (n < 1 || n > 8) {
      std::fprintf(stderr, "usage: %s [criterion 1..8 ...]\n", argv[0]);
      return 2;
    }
    selected.push_back(n);
  }
  if (selected.empty())
    for (int n = 1; n <= 8; ++n) selected.push_back(n);

  bool all_pass = true;
  for (int n : selected) {
    Outcome o;
    try {
      o = all[n - 1]();
    } catch (const std::exception& e) {
      o.check(false, "exception: %s", e.what());
    }
    for (const auto& line : o.lines) std::printf("%s\n", line.c_str());
    std::printf("criterion %d: %s\n", n, o.pass ? "PASS" : "FAIL");
    std::fflush(stdout);
    all_pass = all_pass && o.pass;
  }
  return all_pass ? 0 : 1;
}
