// nilsym: generate and audit minimal surfaces in Nil3.
//
//   nilsym generate    --config run.json [--report r.json] [--mesh 'out_t{t}.obj']
//   nilsym check       --surface surface.csv [--phi-min 0.05] [--report r.json]
//   nilsym solve-gauss --config run.json --out u.csv
//
// Exit codes: 0 pass, 2 config error, 3 integrability failure, 4 residual threshold failure, 5 I/O.

#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "nilsym/nilsym.hpp"

namespace {

using namespace nilsym;

void print_families(const pipeline::RunResult& res) {
  for (const auto& f : res.families) {
    std::printf("t = %s\n", io::format_t(f.t).c_str());
    for (const auto& c : f.checks) {
      if (c.value)
        std::printf("  %-14s %.3e  (threshold %.3e)  %s\n", c.name, *c.value, c.threshold, c.pass ? "ok" : "FAIL");
      else
        std::printf("  %-14s n/a\n", c.name);
    }
    std::printf("  checked nodes %d, Gauss-map skipped %d, rho_min %.4g, phi in [%.4f, %.4f]\n",
                f.report.nodes_checked, f.report.gauss_skipped, f.report.rho_min, f.report.phi_lo, f.report.phi_hi);
  }
}

int finish(const pipeline::RunResult& res) {
  print_families(res);
  if (res.exit_code != pipeline::kPass) std::fprintf(stderr, "nilsym: %s\n", res.diagnostic.c_str());
  std::printf("status: %s (exit %d)\n", res.exit_code == 0 ? "pass" : "fail", res.exit_code);
  return res.exit_code;
}

int load(const std::string& path, io::RunConfig& cfg) {
  try {
    cfg = io::load_config(path);
    return pipeline::kPass;
  } catch (const IoError& e) {
    std::fprintf(stderr, "nilsym: %s\n", e.what());
    return pipeline::kIoError;
  } catch (const Error& e) {
    std::fprintf(stderr, "nilsym: config error: %s\n", e.what());
    return pipeline::kConfigError;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Minimal surfaces in the Heisenberg group via the Sym-Bobenko formula"};
  app.require_subcommand(1);

  std::string config_path, report_path, mesh_pattern, surface_path, out_path;
  double phi_min = 0.05;

  auto* gen = app.add_subcommand("generate", "solve (if needed), integrate, apply the Sym formula, verify, export");
  gen->add_option("-c,--config", config_path, "run configuration (JSON)")->required();
  gen->add_option("--report", report_path, "override outputs.report");
  gen->add_option("--mesh", mesh_pattern, "override outputs.mesh ({t} is replaced by t)");

  auto* chk = app.add_subcommand("check", "verify an external surface given as CSV x,y,F_re,F_im,h");
  chk->add_option("-s,--surface", surface_path, "surface CSV")->required();
  chk->add_option("--phi-min", phi_min, "angle-function floor for the Gauss map tests");
  chk->add_option("--report", report_path, "report path (JSON)");

  auto* solve = app.add_subcommand("solve-gauss", "solve the Gauss equation for rho0 on the config domain");
  solve->add_option("-c,--config", config_path, "run configuration (JSON)")->required();
  solve->add_option("-o,--out", out_path, "CSV output x,y,u with u = log rho0 (default outputs.solver_csv)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : pipeline::kConfigError;
  }

  if (gen->parsed()) {
    io::RunConfig cfg;
    if (const int rc = load(config_path, cfg)) return rc;
    if (!report_path.empty()) cfg.outputs.report = report_path;
    if (!mesh_pattern.empty()) cfg.outputs.mesh = mesh_pattern;
    return finish(pipeline::run_pipeline(cfg));
  }

  if (chk->parsed()) {
    verify::DiscreteSurface surf;
    try {
      surf = io::read_surface_csv(surface_path);
    } catch (const IoError& e) {
      std::fprintf(stderr, "nilsym: %s\n", e.what());
      return pipeline::kIoError;
    } catch (const Error& e) {
      std::fprintf(stderr, "nilsym: surface file error: %s\n", e.what());
      return pipeline::kConfigError;
    }
    return finish(pipeline::run_check(surf, {phi_min, {}, report_path}));
  }

  io::RunConfig cfg;
  if (const int rc = load(config_path, cfg)) return rc;
  if (out_path.empty()) out_path = cfg.outputs.solver_csv;
  if (out_path.empty()) {
    std::fprintf(stderr, "nilsym: no output path (use --out or outputs.solver_csv)\n");
    return pipeline::kConfigError;
  }
  if (cfg.rho0 != io::Rho0Kind::Solved) {
    std::fprintf(stderr, "nilsym: solve-gauss needs potential.rho0.source = \"solved\"\n");
    return pipeline::kConfigError;
  }
  try {
    const auto sol = pipeline::solve_gauss(cfg, cfg.domain);
    gauss::write_csv(sol.u, out_path);
    std::printf("Newton iterations %d, CG iterations %ld, residual %.3e\n", sol.iterations, sol.cg_iterations,
                sol.residual_history.back());
    std::printf("wrote %s\n", out_path.c_str());
    return pipeline::kPass;
  } catch (const IoError& e) {
    std::fprintf(stderr, "nilsym: %s\n", e.what());
    return pipeline::kIoError;
  } catch (const DomainError& e) {
    std::fprintf(stderr, "nilsym: domain error: %s\n", e.what());
    return pipeline::kConfigError;
  } catch (const Error& e) {
    std::fprintf(stderr, "nilsym: solve failed: %s\n", e.what());
    return pipeline::kIntegrabilityFailure;
  }
}
