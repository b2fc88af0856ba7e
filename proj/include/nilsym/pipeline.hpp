#pragma once

// End-to-end runs: potential (optionally solved) -> integrability check ->
// frame integration per t -> Sym-Bobenko surface -> residual audit -> files.
//
// Report schema ("nilsym-report/1"), keys always present and in this order:
//   schema, mode, grid{xmin,xmax,ymin,ymax,nx,ny,h}, potential{...}, integrability_max,
//   solver (null or {iterations, cg_iterations, final_residual}), families[...], status,
//   exit_code, diagnostic, runtime_seconds (null unless outputs.record_runtime)
// Each family entry:
//   t, max{conformality,R1,R2,covariant,A_consistency,Q_holomorphy,tension},
//   thresholds{same keys}, pass{same keys}, shape{fhat,ft}, frame{det_deviation,max_entry,flatness},
//   base_point, ratios{rho_over_rho0{mean,min,max}, Q_over_Q0_abs{mean,min,max}, Q_over_Q0_phase},
//   nodes{total,checked,gauss_skipped}, rho_min, phi_range[lo,hi], mesh
// A-consistency is null when hhat is unknown (the check mode); ratios and base_point are null there too.

#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "nilsym/errors.hpp"
#include "nilsym/gauss_solver.hpp"
#include "nilsym/io.hpp"
#include "nilsym/lax_frame.hpp"
#include "nilsym/potential.hpp"
#include "nilsym/sym_surface.hpp"
#include "nilsym/verify.hpp"

namespace nilsym::pipeline {

using io::json;

enum ExitCode : int {
  kPass = 0,
  kInternal = 1,
  kConfigError = 2,
  kIntegrabilityFailure = 3,
  kResidualFailure = 4,
  kIoError = 5,
};

struct ResidualCheck {
  const char* name;
  std::optional<double> value;
  double threshold;
  bool pass;
};

inline std::vector<ResidualCheck> evaluate_thresholds(const verify::MaxNorms& m, const io::Thresholds& th, double h) {
  const double h2 = h * h;
  auto mk = [&](const char* name, std::optional<double> v, double c) {
    const double thr = std::max(th.abs_floor, c * h2);
    return ResidualCheck{name, v, thr, !v || (std::isfinite(*v) && *v <= thr)};
  };
  return {mk("conformality", m.conformality, th.conformality), mk("R1", m.R1, th.R1), mk("R2", m.R2, th.R2),
          mk("covariant", m.covariant, th.covariant), mk("A_consistency", m.A_consistency, th.A_consistency),
          mk("Q_holomorphy", m.Q_holomorphy, th.Q_holomorphy), mk("tension", m.tension, th.tension)};
}

inline json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

inline json stats_json(const verify::Stats& s) {
  if (s.count == 0) return nullptr;
  return json{{"mean", s.mean}, {"min", s.min}, {"max", s.max}};
}

inline json grid_json(const Grid2D& g) {
  return json{{"xmin", g.xmin}, {"xmax", g.xmax}, {"ymin", g.ymin}, {"ymax", g.ymax},
              {"nx", g.nx},     {"ny", g.ny},     {"h", g.h()}};
}

struct FamilyResult {
  double t = 0.0;
  verify::ResidualReport report;
  std::vector<ResidualCheck> checks;
  std::optional<verify::PotentialRatios> ratios;
  std::optional<double> base_point;  ///< max |coordinate| of f_t at z = 0 when 0 is a node
  double fhat_shape = 0.0, ft_shape = 0.0;
  double det_deviation = 0.0, max_entry = 0.0, flatness = 0.0;
  std::string mesh;

  bool pass() const {
    for (const auto& c : checks)
      if (!c.pass) return false;
    return true;
  }
};

inline json family_json(const FamilyResult& f) {
  json max = json::object(), thr = json::object(), pass = json::object();
  for (const auto& c : f.checks) {
    max[c.name] = optional_number(c.value);
    thr[c.name] = c.threshold;
    pass[c.name] = c.pass;
  }
  json ratios = nullptr;
  if (f.ratios)
    ratios = json{{"rho_over_rho0", stats_json(f.ratios->rho_over_rho0)},
                  {"Q_over_Q0_abs", stats_json(f.ratios->Q_over_Q0_abs)},
                  {"Q_over_Q0_phase", f.ratios->Q_over_Q0_phase}};
  const auto& r = f.report;
  return json{{"t", f.t},
              {"max", max},
              {"thresholds", thr},
              {"pass", pass},
              {"shape", {{"fhat", f.fhat_shape}, {"ft", f.ft_shape}}},
              {"frame", {{"det_deviation", f.det_deviation}, {"max_entry", f.max_entry}, {"flatness", f.flatness}}},
              {"base_point", optional_number(f.base_point)},
              {"ratios", ratios},
              {"nodes", {{"total", r.nodes_total}, {"checked", r.nodes_checked}, {"gauss_skipped", r.gauss_skipped}}},
              {"rho_min", r.rho_min},
              {"phi_range", {r.phi_lo, r.phi_hi}},
              {"mesh", f.mesh.empty() ? json(nullptr) : json(f.mesh)}};
}

struct RunResult {
  int exit_code = kPass;
  std::string diagnostic;
  json report;
  std::vector<FamilyResult> families;
  std::optional<gauss::SolverGrid> solver;
  std::vector<io::MeshSummary> meshes;
};

inline void write_report(const json& report, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open " + path + " for writing");
  os << report.dump(2) << '\n';
  os.flush();
  if (!os) throw IoError("write failed: " + path);
}

/// Dirichlet data for the solved source, as configured.
inline std::function<double(cplx)> boundary_function(const io::RunConfig& cfg) {
  switch (cfg.bc) {
    case io::BcKind::Liouville:
      return [](cplx z) { return std::log(liouville_exact(z)); };
    case io::BcKind::Balanced: {
      // rho0 = 4|Q0| balances exp(u)/8 against 2|Q0|^2 exp(-u); log|Q0| is harmonic.
      HolomorphicPolynomial q(cfg.q0);
      return [q](cplx z) {
        const double m = std::abs(q(z));
        if (!(m > 0.0)) throw DomainError("balanced boundary data needs Q0 != 0 on the boundary");
        return std::log(4.0 * m);
      };
    }
    case io::BcKind::Constant:
    default: {
      const double v = cfg.bc_value;
      return [v](cplx) { return v; };
    }
  }
}

inline gauss::SolverGrid solve_gauss(const io::RunConfig& cfg, const Grid2D& grid) {
  const auto bc = gauss::sample_boundary(grid, boundary_function(cfg));
  return gauss::newton_solve_from_bc(HolomorphicPolynomial(cfg.q0), bc, cfg.solver);
}

namespace detail {

inline json base_report(const char* mode, const Grid2D& g) {
  return json{{"schema", "nilsym-report/1"},
              {"mode", mode},
              {"grid", grid_json(g)},
              {"potential", nullptr},
              {"integrability_max", nullptr},
              {"solver", nullptr},
              {"families", json::array()},
              {"status", "pass"},
              {"exit_code", 0},
              {"diagnostic", ""},
              {"runtime_seconds", nullptr}};
}

inline void finish(RunResult& res, int code, std::string diagnostic) {
  res.exit_code = code;
  res.diagnostic = std::move(diagnostic);
  res.report["status"] = code == kPass ? "pass" : "fail";
  res.report["exit_code"] = code;
  res.report["diagnostic"] = res.diagnostic;
}

}  // namespace detail

/// Full generate pipeline. Never throws for data-dependent failures; they map to exit codes.
inline RunResult run_pipeline(const io::RunConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  RunResult res;
  res.report = detail::base_report("generate", cfg.domain);
  res.report["potential"] = io::to_json(cfg)["potential"];
  const Grid2D& g = cfg.domain;

  auto stamp_runtime = [&] {
    if (cfg.outputs.record_runtime)
      res.report["runtime_seconds"] =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  };
  auto write_outputs = [&]() -> bool {
    stamp_runtime();
    if (cfg.outputs.report.empty()) return true;
    try {
      write_report(res.report, cfg.outputs.report);
      return true;
    } catch (const IoError& e) {
      detail::finish(res, kIoError, e.what());
      return false;
    }
  };
  auto fail = [&](int code, const std::string& msg) {
    detail::finish(res, code, msg);
    write_outputs();
    return res;
  };

  if (cfg.t_values.empty()) return fail(kConfigError, "t_values is empty");

  // Potential.
  PotentialSpec spec;
  try {
    if (cfg.rho0 == io::Rho0Kind::Solved) {
      const Grid2D sg = gauss::padded_solver_grid(g, cfg.refine, cfg.pad_fraction);
      res.solver = solve_gauss(cfg, sg);
      res.report["solver"] = json{{"iterations", res.solver->iterations},
                                  {"cg_iterations", res.solver->cg_iterations},
                                  {"final_residual", res.solver->residual_history.back()},
                                  {"grid", grid_json(sg)}};
      if (!cfg.outputs.solver_csv.empty()) gauss::write_csv(res.solver->u, cfg.outputs.solver_csv);
      spec = solved_potential(res.solver->u, cfg.q0);
    } else {
      spec = io::analytic_potential(cfg);
    }
    spec.validate();
    validate_domain(g, spec);
  } catch (const DomainError& e) {
    return fail(kConfigError, std::string("domain error: ") + e.what());
  } catch (const IoError& e) {
    return fail(kIoError, e.what());
  } catch (const Error& e) {
    return fail(kIntegrabilityFailure, std::string("Gauss equation solve failed: ") + e.what());
  }

  // Integrability of (rho0, Q0).
  const double integ = max_integrability_residual(spec, g);
  res.report["integrability_max"] = integ;
  if (!(integ <= cfg.tolerances.integrability))
    return fail(kIntegrabilityFailure, "integrability residual " + sci(integ) + " exceeds " +
                                           sci(cfg.tolerances.integrability));

  sym::SweepOptions sweep;
  sweep.shape_tol = cfg.tolerances.shape;
  sweep.integration.flatness_threshold = cfg.tolerances.flatness;
  verify::VerifyOptions vopts;
  vopts.phi_min = cfg.tolerances.phi_min;

  const int j0 = static_cast<int>(std::lround(-g.xmin / g.hx()));
  const int i0 = static_cast<int>(std::lround(-g.ymin / g.hy()));
  const bool origin_is_node = g.z(i0, j0) == 0.0;

  bool all_pass = true;
  for (double t : cfg.t_values) {
    FamilyResult fam;
    fam.t = t;
    try {
      const sym::SurfaceGrid s = sym::surface_at(spec, g, t, sweep);
      fam.report = verify::verify_surface(verify::from_sym(s), vopts);
      fam.ratios = verify::potential_ratios(fam.report, spec, t);
      fam.checks = evaluate_thresholds(fam.report.max, cfg.thresholds, g.h());
      fam.fhat_shape = s.fhat_shape_defect;
      fam.ft_shape = s.ft_shape_defect;
      fam.det_deviation = s.frames.max_det_deviation;
      fam.max_entry = s.frames.max_entry;
      fam.flatness = s.frames.max_flatness;
      if (origin_is_node) {
        const auto p = s.point(i0, j0);
        fam.base_point = std::max({std::abs(p.x1), std::abs(p.x2), std::abs(p.x3)});
      }
      if (!cfg.outputs.mesh.empty()) {
        const auto summary = io::export_obj(s, io::expand_pattern(cfg.outputs.mesh, t));
        fam.mesh = summary.path;
        res.meshes.push_back(summary);
      }
    } catch (const NonFlatInput& e) {
      return fail(kIntegrabilityFailure, std::string("t = ") + io::format_t(t) + ": " + e.what());
    } catch (const IoError& e) {
      return fail(kIoError, e.what());
    } catch (const DomainError& e) {
      return fail(kConfigError, std::string("t = ") + io::format_t(t) + ": " + e.what());
    } catch (const Error& e) {
      return fail(kResidualFailure, std::string("t = ") + io::format_t(t) + ": " + e.what());
    }
    all_pass = all_pass && fam.pass();
    res.report["families"].push_back(family_json(fam));
    res.families.push_back(std::move(fam));
  }

  if (all_pass) {
    detail::finish(res, kPass, "");
  } else {
    std::string msg = "residual thresholds exceeded:";
    for (const auto& f : res.families)
      for (const auto& c : f.checks)
        if (!c.pass) msg += " [t=" + io::format_t(f.t) + " " + c.name + "]";
    detail::finish(res, kResidualFailure, msg);
  }
  write_outputs();
  return res;
}

struct CheckOptions {
  double phi_min = 0.05;
  io::Thresholds thresholds;
  std::string report_path;
};

/// Audit an externally supplied surface; exit 0 iff every residual class is within threshold.
inline RunResult run_check(const verify::DiscreteSurface& surf, const CheckOptions& opts) {
  RunResult res;
  res.report = detail::base_report("check", surf.grid());
  FamilyResult fam;
  try {
    fam.report = verify::verify_surface(surf, verify::VerifyOptions{.phi_min = opts.phi_min});
    fam.checks = evaluate_thresholds(fam.report.max, opts.thresholds, surf.grid().h());
    res.report["families"].push_back(family_json(fam));
    res.families.push_back(fam);
    if (fam.pass()) {
      detail::finish(res, kPass, "");
    } else {
      std::string msg = "residual thresholds exceeded:";
      for (const auto& c : fam.checks)
        if (!c.pass) msg += std::string(" [") + c.name + "]";
      detail::finish(res, kResidualFailure, msg);
    }
  } catch (const DomainError& e) {
    detail::finish(res, kConfigError, e.what());
  } catch (const Error& e) {
    detail::finish(res, kResidualFailure, e.what());
  }
  if (!opts.report_path.empty()) {
    try {
      write_report(res.report, opts.report_path);
    } catch (const IoError& e) {
      detail::finish(res, kIoError, e.what());
    }
  }
  return res;
}

}  // namespace nilsym::pipeline
