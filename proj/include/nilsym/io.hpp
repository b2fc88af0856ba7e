#pragma once

// Run configuration (JSON), OBJ-style mesh export and CSV surface import.
//
// Config schema (every key except "potential" and "domain" is optional):
//
//   {
//     "potential": {
//       "Q0":   [[re, im], ...],                      // coefficients of 1, z, z^2, ...; degree <= 8
//       "rho0": {"source": "constant", "value": 1.0}
//             | {"source": "liouville"}                // requires Q0 = 0 and a domain in the unit disk
//             | {"source": "solved",
//                "bc": {"kind": "constant", "value": 0.0} | {"kind": "liouville"} | {"kind": "balanced"},
//                "refine": 2, "pad_fraction": 0.0625}
//     },
//     "domain":     {"xmin": -1, "xmax": 1, "ymin": -1, "ymax": 1, "nx": 65, "ny": 65},
//     "t_values":   [0, 0.7853981633974483, 1.5707963267948966],
//     "solver":     {"tol": 1e-10, "max_iter": 50, "cg_rel_tol": 1e-12},
//     "tolerances": {"shape": 1e-6, "flatness": 1e-4, "phi_min": 0.05, "integrability": 1e-8},
//     "thresholds": {"abs_floor": 1e-9, "conformality": 2, "R1": 2, "R2": 2, "covariant": 2,
//                    "A_consistency": 2, "Q_holomorphy": 2, "tension": 2},
//     "outputs":    {"mesh": "surface_t{t}.obj", "report": "report.json", "solver_csv": "",
//                    "record_runtime": false}
//   }
//
// Residual thresholds are max(abs_floor, C * h^2) with h the larger grid spacing.
// Empty output paths disable the corresponding file.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "nilsym/errors.hpp"
#include "nilsym/gauss_solver.hpp"
#include "nilsym/grid.hpp"
#include "nilsym/potential.hpp"
#include "nilsym/sym_surface.hpp"
#include "nilsym/verify.hpp"

namespace nilsym::io {

using json = nlohmann::ordered_json;

enum class Rho0Kind { Constant, Liouville, Solved };
enum class BcKind { Constant, Liouville, Balanced };

struct Tolerances {
  double shape = 1e-6;
  double flatness = 1e-4;
  double phi_min = 0.05;
  double integrability = 1e-8;
  friend bool operator==(const Tolerances&, const Tolerances&) = default;
};

/// Per-class constants C of the residual thresholds max(abs_floor, C h^2).
struct Thresholds {
  double abs_floor = 1e-9;
  double conformality = 2.0;
  double R1 = 2.0;
  double R2 = 2.0;
  double covariant = 2.0;
  double A_consistency = 2.0;
  double Q_holomorphy = 2.0;
  double tension = 2.0;
  friend bool operator==(const Thresholds&, const Thresholds&) = default;
};

struct Outputs {
  std::string mesh;        ///< path pattern, "{t}" replaced by the formatted t value
  std::string report;
  std::string solver_csv;
  bool record_runtime = false;
  friend bool operator==(const Outputs&, const Outputs&) = default;
};

struct RunConfig {
  std::vector<cplx> q0;
  Rho0Kind rho0 = Rho0Kind::Constant;
  double rho0_value = 1.0;
  BcKind bc = BcKind::Constant;
  double bc_value = 0.0;
  int refine = 2;
  double pad_fraction = 0.0625;
  Grid2D domain;
  std::vector<double> t_values{0.0, std::numbers::pi / 4, std::numbers::pi / 2};
  gauss::SolverSettings solver;
  Tolerances tolerances;
  Thresholds thresholds;
  Outputs outputs;

  friend bool operator==(const RunConfig& a, const RunConfig& b) {
    return a.q0 == b.q0 && a.rho0 == b.rho0 && a.rho0_value == b.rho0_value && a.bc == b.bc &&
           a.bc_value == b.bc_value && a.refine == b.refine && a.pad_fraction == b.pad_fraction &&
           a.domain == b.domain && a.t_values == b.t_values && a.solver.tol == b.solver.tol &&
           a.solver.max_iter == b.solver.max_iter && a.solver.cg_rel_tol == b.solver.cg_rel_tol &&
           a.tolerances == b.tolerances && a.thresholds == b.thresholds && a.outputs == b.outputs;
  }
};

namespace detail {

class Reader {
 public:
  Reader(const json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) throw SchemaError(path_.empty() ? "/" : path_, "expected an object");
  }

  bool has(const std::string& key) const { return node_.contains(key); }

  const json& at(const std::string& key) {
    seen_.insert(key);
    if (!node_.contains(key)) throw SchemaError(path_ + "/" + key, "missing required key");
    return node_.at(key);
  }

  std::string child(const std::string& key) const { return path_ + "/" + key; }

  double number(const std::string& key, double fallback, bool required = false) {
    seen_.insert(key);
    if (!node_.contains(key)) {
      if (required) throw SchemaError(child(key), "missing required key");
      return fallback;
    }
    const auto& v = node_.at(key);
    if (!v.is_number()) throw SchemaError(child(key), "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw SchemaError(child(key), "expected a finite number");
    return d;
  }

  double positive(const std::string& key, double fallback) {
    const double d = number(key, fallback);
    if (!(d > 0.0)) throw SchemaError(child(key), "expected a positive number");
    return d;
  }

  int integer(const std::string& key, int fallback, bool required = false) {
    seen_.insert(key);
    if (!node_.contains(key)) {
      if (required) throw SchemaError(child(key), "missing required key");
      return fallback;
    }
    const auto& v = node_.at(key);
    if (!v.is_number_integer()) throw SchemaError(child(key), "expected an integer");
    return v.get<int>();
  }

  std::string string(const std::string& key, const std::string& fallback, bool required = false) {
    seen_.insert(key);
    if (!node_.contains(key)) {
      if (required) throw SchemaError(child(key), "missing required key");
      return fallback;
    }
    const auto& v = node_.at(key);
    if (!v.is_string()) throw SchemaError(child(key), "expected a string");
    return v.get<std::string>();
  }

  bool boolean(const std::string& key, bool fallback) {
    seen_.insert(key);
    if (!node_.contains(key)) return fallback;
    const auto& v = node_.at(key);
    if (!v.is_boolean()) throw SchemaError(child(key), "expected true or false");
    return v.get<bool>();
  }

  /// Rejects keys that were never read.
  void finish() const {
    for (const auto& item : node_.items())
      if (!seen_.count(item.key())) throw SchemaError(child(item.key()), "unknown key");
  }

 private:
  const json& node_;
  std::string path_;
  std::set<std::string> seen_;
};

inline std::vector<cplx> parse_q0(const json& arr, const std::string& path) {
  if (!arr.is_array()) throw SchemaError(path, "expected an array of [re, im] pairs");
  if (arr.size() > HolomorphicPolynomial::kMaxDegree + 1) throw SchemaError(path, "Q0 degree exceeds 8");
  std::vector<cplx> out;
  for (std::size_t k = 0; k < arr.size(); ++k) {
    const auto& c = arr[k];
    const std::string p = path + "/" + std::to_string(k);
    if (!c.is_array() || c.size() != 2 || !c[0].is_number() || !c[1].is_number())
      throw SchemaError(p, "expected [re, im]");
    out.emplace_back(c[0].get<double>(), c[1].get<double>());
    if (!std::isfinite(out.back().real()) || !std::isfinite(out.back().imag())) throw SchemaError(p, "not finite");
  }
  return out;
}

}  // namespace detail

inline RunConfig parse_config_json(const json& root) {
  RunConfig cfg;
  detail::Reader top(root, "");

  {
    detail::Reader pot(top.at("potential"), "/potential");
    cfg.q0 = pot.has("Q0") ? detail::parse_q0(pot.at("Q0"), "/potential/Q0") : std::vector<cplx>{};
    detail::Reader rho(pot.at("rho0"), "/potential/rho0");
    const std::string source = rho.string("source", "", true);
    if (source == "constant") {
      cfg.rho0 = Rho0Kind::Constant;
      cfg.rho0_value = rho.positive("value", 1.0);
    } else if (source == "liouville") {
      cfg.rho0 = Rho0Kind::Liouville;
      if (!HolomorphicPolynomial(cfg.q0).is_zero())
        throw SchemaError("/potential/rho0/source", "liouville rho0 is incompatible with a nonzero Q0");
    } else if (source == "solved") {
      cfg.rho0 = Rho0Kind::Solved;
      cfg.refine = rho.integer("refine", 2);
      if (cfg.refine < 2) throw SchemaError("/potential/rho0/refine", "must be an integer >= 2");
      cfg.pad_fraction = rho.number("pad_fraction", 0.0625);
      if (cfg.pad_fraction < 0.0) throw SchemaError("/potential/rho0/pad_fraction", "must be >= 0");
      if (rho.has("bc")) {
        detail::Reader bc(rho.at("bc"), "/potential/rho0/bc");
        const std::string kind = bc.string("kind", "", true);
        if (kind == "constant") {
          cfg.bc = BcKind::Constant;
          cfg.bc_value = bc.number("value", 0.0);
        } else if (kind == "liouville") {
          cfg.bc = BcKind::Liouville;
        } else if (kind == "balanced") {
          cfg.bc = BcKind::Balanced;
        } else {
          throw SchemaError("/potential/rho0/bc/kind", "expected constant, liouville or balanced");
        }
        bc.finish();
      }
    } else {
      throw SchemaError("/potential/rho0/source", "expected constant, liouville or solved");
    }
    rho.finish();
    pot.finish();
  }

  {
    detail::Reader dom(top.at("domain"), "/domain");
    cfg.domain.xmin = dom.number("xmin", 0.0, true);
    cfg.domain.xmax = dom.number("xmax", 0.0, true);
    cfg.domain.ymin = dom.number("ymin", 0.0, true);
    cfg.domain.ymax = dom.number("ymax", 0.0, true);
    cfg.domain.nx = dom.integer("nx", 0, true);
    cfg.domain.ny = dom.integer("ny", 0, true);
    dom.finish();
    if (cfg.domain.nx < 9) throw SchemaError("/domain/nx", "must be >= 9");
    if (cfg.domain.ny < 9) throw SchemaError("/domain/ny", "must be >= 9");
    if (!(cfg.domain.xmin < cfg.domain.xmax)) throw SchemaError("/domain/xmax", "must exceed xmin");
    if (!(cfg.domain.ymin < cfg.domain.ymax)) throw SchemaError("/domain/ymax", "must exceed ymin");
    if (!(cfg.domain.xmin < 0.0 && cfg.domain.xmax > 0.0 && cfg.domain.ymin < 0.0 && cfg.domain.ymax > 0.0))
      throw DomainError("/domain: z = 0 must lie in the interior of the domain");
  }

  if (top.has("t_values")) {
    const auto& tv = top.at("t_values");
    if (!tv.is_array() || tv.empty()) throw SchemaError("/t_values", "expected a nonempty array of numbers");
    cfg.t_values.clear();
    for (std::size_t k = 0; k < tv.size(); ++k) {
      if (!tv[k].is_number()) throw SchemaError("/t_values/" + std::to_string(k), "expected a number");
      cfg.t_values.push_back(tv[k].get<double>());
    }
  }

  if (top.has("solver")) {
    detail::Reader s(top.at("solver"), "/solver");
    cfg.solver.tol = s.positive("tol", cfg.solver.tol);
    cfg.solver.max_iter = s.integer("max_iter", cfg.solver.max_iter);
    if (cfg.solver.max_iter < 0) throw SchemaError("/solver/max_iter", "must be >= 0");
    cfg.solver.cg_rel_tol = s.positive("cg_rel_tol", cfg.solver.cg_rel_tol);
    s.finish();
  }

  if (top.has("tolerances")) {
    detail::Reader t(top.at("tolerances"), "/tolerances");
    auto& tol = cfg.tolerances;
    tol.shape = t.positive("shape", tol.shape);
    tol.flatness = t.positive("flatness", tol.flatness);
    tol.phi_min = t.number("phi_min", tol.phi_min);
    if (!(tol.phi_min >= 0.0 && tol.phi_min < 1.0)) throw SchemaError("/tolerances/phi_min", "must lie in [0, 1)");
    tol.integrability = t.positive("integrability", tol.integrability);
    t.finish();
  }

  if (top.has("thresholds")) {
    detail::Reader t(top.at("thresholds"), "/thresholds");
    auto& th = cfg.thresholds;
    th.abs_floor = t.positive("abs_floor", th.abs_floor);
    th.conformality = t.positive("conformality", th.conformality);
    th.R1 = t.positive("R1", th.R1);
    th.R2 = t.positive("R2", th.R2);
    th.covariant = t.positive("covariant", th.covariant);
    th.A_consistency = t.positive("A_consistency", th.A_consistency);
    th.Q_holomorphy = t.positive("Q_holomorphy", th.Q_holomorphy);
    th.tension = t.positive("tension", th.tension);
    t.finish();
  }

  if (top.has("outputs")) {
    detail::Reader o(top.at("outputs"), "/outputs");
    cfg.outputs.mesh = o.string("mesh", "");
    cfg.outputs.report = o.string("report", "");
    cfg.outputs.solver_csv = o.string("solver_csv", "");
    cfg.outputs.record_runtime = o.boolean("record_runtime", false);
    o.finish();
  }

  top.finish();
  return cfg;
}

inline RunConfig parse_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw SchemaError("/", std::string("malformed JSON: ") + e.what());
  }
  return parse_config_json(root);
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open config " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str());
}

inline json to_json(const RunConfig& cfg) {
  json q0 = json::array();
  for (const auto& c : cfg.q0) q0.push_back({c.real(), c.imag()});
  json rho;
  switch (cfg.rho0) {
    case Rho0Kind::Constant:
      rho = {{"source", "constant"}, {"value", cfg.rho0_value}};
      break;
    case Rho0Kind::Liouville:
      rho = {{"source", "liouville"}};
      break;
    case Rho0Kind::Solved: {
      json bc;
      if (cfg.bc == BcKind::Constant) bc = {{"kind", "constant"}, {"value", cfg.bc_value}};
      if (cfg.bc == BcKind::Liouville) bc = {{"kind", "liouville"}};
      if (cfg.bc == BcKind::Balanced) bc = {{"kind", "balanced"}};
      rho = {{"source", "solved"}, {"bc", bc}, {"refine", cfg.refine}, {"pad_fraction", cfg.pad_fraction}};
      break;
    }
  }
  const auto& d = cfg.domain;
  const auto& tol = cfg.tolerances;
  const auto& th = cfg.thresholds;
  return json{
      {"potential", {{"Q0", q0}, {"rho0", rho}}},
      {"domain", {{"xmin", d.xmin}, {"xmax", d.xmax}, {"ymin", d.ymin}, {"ymax", d.ymax}, {"nx", d.nx}, {"ny", d.ny}}},
      {"t_values", cfg.t_values},
      {"solver", {{"tol", cfg.solver.tol}, {"max_iter", cfg.solver.max_iter}, {"cg_rel_tol", cfg.solver.cg_rel_tol}}},
      {"tolerances",
       {{"shape", tol.shape}, {"flatness", tol.flatness}, {"phi_min", tol.phi_min}, {"integrability", tol.integrability}}},
      {"thresholds",
       {{"abs_floor", th.abs_floor},
        {"conformality", th.conformality},
        {"R1", th.R1},
        {"R2", th.R2},
        {"covariant", th.covariant},
        {"A_consistency", th.A_consistency},
        {"Q_holomorphy", th.Q_holomorphy},
        {"tension", th.tension}}},
      {"outputs",
       {{"mesh", cfg.outputs.mesh},
        {"report", cfg.outputs.report},
        {"solver_csv", cfg.outputs.solver_csv},
        {"record_runtime", cfg.outputs.record_runtime}}},
  };
}

inline std::string serialize_config(const RunConfig& cfg) { return to_json(cfg).dump(2) + "\n"; }

/// The potential described by a config; solved sources need the solved field separately.
inline PotentialSpec analytic_potential(const RunConfig& cfg) {
  PotentialSpec spec{HolomorphicPolynomial(cfg.q0), rho0::Constant{cfg.rho0_value}};
  if (cfg.rho0 == Rho0Kind::Liouville) spec.rho0_source = rho0::Liouville{};
  return spec;
}

/// "%.6f" rendering of t used in mesh file names.
inline std::string format_t(double t) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", t);
  return buf;
}

inline std::string expand_pattern(const std::string& pattern, double t) {
  std::string out = pattern;
  const std::string key = "{t}";
  for (auto pos = out.find(key); pos != std::string::npos; pos = out.find(key, pos)) {
    const std::string v = format_t(t);
    out.replace(pos, key.size(), v);
    pos += v.size();
  }
  return out;
}

// ---------------------------------------------------------------------------
// Mesh files

struct MeshSummary {
  std::string path;
  std::size_t vertices = 0;
  std::size_t faces = 0;
};

/// 12 significant digits; zero (including -0) prints as "0".
inline std::string format_coord(double v) {
  if (v == 0.0) return "0";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

inline MeshSummary write_obj(const std::vector<nil3::Nil3Point>& vertices, int nx, int ny, std::ostream& os) {
  for (const auto& p : vertices)
    os << "v " << format_coord(p.x1) << ' ' << format_coord(p.x2) << ' ' << format_coord(p.x3) << '\n';
  std::size_t faces = 0;
  // Two triangles per cell, counter-clockwise in the (x, y) parameter plane.
  for (int i = 0; i + 1 < ny; ++i)
    for (int j = 0; j + 1 < nx; ++j) {
      const long a = static_cast<long>(i) * nx + j + 1, b = a + 1, c = a + nx, d = c + 1;
      os << "f " << a << ' ' << b << ' ' << d << '\n';
      os << "f " << a << ' ' << d << ' ' << c << '\n';
      faces += 2;
    }
  return {"", vertices.size(), faces};
}

inline MeshSummary export_obj(const sym::SurfaceGrid& s, const std::string& path) {
  const Grid2D& g = s.grid();
  std::vector<nil3::Nil3Point> verts;
  verts.reserve(g.size());
  for (int i = 0; i < g.ny; ++i)
    for (int j = 0; j < g.nx; ++j) verts.push_back(s.point(i, j));
  std::ofstream os(path);
  if (!os) throw IoError("cannot open " + path + " for writing");
  MeshSummary summary = write_obj(verts, g.nx, g.ny, os);
  os.flush();
  if (!os) throw IoError("write failed: " + path);
  summary.path = path;
  return summary;
}

struct ObjMesh {
  std::vector<nil3::Nil3Point> vertices;
  std::vector<std::array<long, 3>> faces;
};

inline ObjMesh read_obj(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open " + path);
  ObjMesh mesh;
  std::string line;
  while (std::getline(is, line)) {
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag == "v") {
      nil3::Nil3Point p;
      if (!(ls >> p.x1 >> p.x2 >> p.x3)) throw IoError("bad vertex line in " + path);
      mesh.vertices.push_back(p);
    } else if (tag == "f") {
      std::array<long, 3> f{};
      if (!(ls >> f[0] >> f[1] >> f[2])) throw IoError("bad face line in " + path);
      mesh.faces.push_back(f);
    }
  }
  return mesh;
}

// ---------------------------------------------------------------------------
// External surfaces: CSV with header x,y,F_re,F_im,h on a full rectangular grid.

inline verify::DiscreteSurface read_surface_csv(std::istream& is, const std::string& name = "<stream>") {
  std::string line;
  if (!std::getline(is, line)) throw IoError(name + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "x,y,F_re,F_im,h") throw SchemaError(name, "expected header x,y,F_re,F_im,h");

  struct Row {
    double x, y, fre, fim, h;
  };
  std::vector<Row> rows;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    Row r{};
    char c1, c2, c3, c4;
    std::istringstream ls(line);
    if (!(ls >> r.x >> c1 >> r.y >> c2 >> r.fre >> c3 >> r.fim >> c4 >> r.h) || c1 != ',' || c2 != ',' ||
        c3 != ',' || c4 != ',')
      throw SchemaError(name + ":" + std::to_string(lineno), "expected five comma-separated numbers");
    rows.push_back(r);
  }

  auto uniques = [&](auto key) {
    std::vector<double> v;
    for (const auto& r : rows) v.push_back(key(r));
    std::sort(v.begin(), v.end());
    std::vector<double> u;
    for (double d : v)
      if (u.empty() || std::abs(d - u.back()) > 1e-9 * std::max(1.0, std::abs(d))) u.push_back(d);
    return u;
  };
  const auto xs = uniques([](const Row& r) { return r.x; });
  const auto ys = uniques([](const Row& r) { return r.y; });
  if (xs.size() < 5 || ys.size() < 5) throw SchemaError(name, "grid needs at least 5 nodes per direction");
  if (xs.size() * ys.size() != rows.size()) throw SchemaError(name, "rows do not form a full rectangular grid");

  Grid2D g{xs.front(), xs.back(), ys.front(), ys.back(), static_cast<int>(xs.size()), static_cast<int>(ys.size())};
  for (std::size_t k = 0; k < xs.size(); ++k)
    if (std::abs(xs[k] - g.x(static_cast<int>(k))) > 1e-6 * g.hx()) throw SchemaError(name, "x spacing not uniform");
  for (std::size_t k = 0; k < ys.size(); ++k)
    if (std::abs(ys[k] - g.y(static_cast<int>(k))) > 1e-6 * g.hy()) throw SchemaError(name, "y spacing not uniform");

  verify::DiscreteSurface s{NodeField<cplx>(g, nan_value<cplx>()), NodeField<double>(g, kNaN), std::nullopt};
  for (const auto& r : rows) {
    const int j = static_cast<int>(std::lround((r.x - g.xmin) / g.hx()));
    const int i = static_cast<int>(std::lround((r.y - g.ymin) / g.hy()));
    if (!std::isnan(s.h(i, j))) throw SchemaError(name, "duplicate node in surface grid");
    s.F(i, j) = {r.fre, r.fim};
    s.h(i, j) = r.h;
  }
  return s;
}

inline verify::DiscreteSurface read_surface_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open " + path);
  return read_surface_csv(is, path);
}

inline void write_surface_csv(const verify::DiscreteSurface& s, std::ostream& os) {
  const Grid2D& g = s.grid();
  os << "x,y,F_re,F_im,h\n";
  char buf[160];
  for (int i = 0; i < g.ny; ++i)
    for (int j = 0; j < g.nx; ++j) {
      std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g\n", g.x(j), g.y(i), s.F(i, j).real(),
                    s.F(i, j).imag(), s.h(i, j));
      os << buf;
    }
}

}  // namespace nilsym::io
