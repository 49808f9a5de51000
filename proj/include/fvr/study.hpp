#pragma once

// Experiment orchestration: JSON problem configs, solve / convergence /
// stability runs, and machine-readable CSV/JSON output.

#include <cstdint>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "fvr/analysis.hpp"
#include "fvr/assembly.hpp"
#include "fvr/expr.hpp"
#include "fvr/linalg.hpp"
#include "fvr/mesh.hpp"
#include "fvr/space.hpp"

namespace fvr {

inline constexpr const char* kSchemaVersion = "1";
inline constexpr const char* kToolVersion = "fvrect 1.0.0";

/// Configuration or usage problem; mapped to exit code 2 by the CLI.
class config_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct QuadratureConfig {
  std::optional<int> matrix_order, rhs_order, error_order;
};

struct ProblemConfig {
  double a = 0, b = 1, c = 0, d = 1;
  int r = 2;
  Coefficient alpha = Coefficient::constant(1.0);
  bool alpha_pcw = true;
  ExprPtr f;
  std::optional<ExprPtr> u_exact;
  // mesh: uniform (m, n) or explicit breakpoints
  bool uniform = true;
  int m = 4, n = 4;
  std::vector<double> xs, ys;
  QuadratureConfig quad;
  std::uint64_t seed = 1;
  std::string config_hash;

  int matrix_order() const { return quad.matrix_order.value_or(r + 2); }
  int rhs_order() const { return quad.rhs_order.value_or(r + 3); }
  int error_order() const { return quad.error_order.value_or(r + 3); }

  PrimalMesh make_mesh() const {
    if (uniform) return PrimalMesh::uniform(a, b, c, d, m, n);
    return PrimalMesh(xs, ys);
  }
  PrimalMesh make_mesh(int level_n) const {
    return PrimalMesh::uniform(a, b, c, d, level_n, level_n);
  }
};

namespace detail {

inline std::string fnv1a_hex(const std::string& data) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : data) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline std::string iso_timestamp() {
  std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline std::string fmt_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace detail

inline ProblemConfig parse_config(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const std::exception& e) {
    throw config_error(std::string("config is not valid JSON: ") + e.what());
  }
  ProblemConfig cfg;
  cfg.config_hash = detail::fnv1a_hex(text);
  try {
    if (j.contains("domain")) {
      const auto& d = j.at("domain");
      cfg.a = d.at("a").get<double>();
      cfg.b = d.at("b").get<double>();
      cfg.c = d.at("c").get<double>();
      cfg.d = d.at("d").get<double>();
    }
    if (!(cfg.a < cfg.b && cfg.c < cfg.d))
      throw config_error("config: domain requires a < b and c < d");
    cfg.r = j.value("r", 2);
    if (cfg.r < 1 || cfg.r > kMaxRuleOrder) throw config_error("config: r out of range");

    if (j.contains("alpha")) {
      const auto& a = j.at("alpha");
      if (a.contains("constant")) {
        cfg.alpha = Coefficient::constant(a.at("constant").get<double>());
        cfg.alpha_pcw = true;
      } else if (a.contains("grid")) {
        auto vals = a.at("grid").get<std::vector<std::vector<double>>>();
        cfg.alpha = Coefficient::grid(std::move(vals));
        cfg.alpha_pcw = true;
      } else if (a.contains("expr")) {
        ExprPtr e = expr_parse(a.at("expr").get<std::string>());
        cfg.alpha = Coefficient::field(
            [e](double x, double y) { return expr_eval(e, x, y); });
        cfg.alpha_pcw = false;
      } else {
        throw config_error("config: alpha must be one of constant | grid | expr");
      }
    }
    if (!j.contains("f")) throw config_error("config: missing source term f");
    cfg.f = expr_parse(j.at("f").get<std::string>());
    if (j.contains("u_exact")) cfg.u_exact = expr_parse(j.at("u_exact").get<std::string>());

    if (j.contains("mesh")) {
      const auto& m = j.at("mesh");
      if (m.contains("uniform")) {
        cfg.uniform = true;
        cfg.m = m.at("uniform").at("m").get<int>();
        cfg.n = m.at("uniform").at("n").get<int>();
        if (cfg.m < 1 || cfg.n < 1) throw config_error("config: mesh dimensions must be >= 1");
      } else if (m.contains("breakpoints")) {
        cfg.uniform = false;
        cfg.xs = m.at("breakpoints").at("xs").get<std::vector<double>>();
        cfg.ys = m.at("breakpoints").at("ys").get<std::vector<double>>();
      } else {
        throw config_error("config: mesh must be uniform | breakpoints");
      }
    }
    if (j.contains("quadrature")) {
      const auto& q = j.at("quadrature");
      if (q.contains("matrix_order")) cfg.quad.matrix_order = q.at("matrix_order").get<int>();
      if (q.contains("rhs_order")) cfg.quad.rhs_order = q.at("rhs_order").get<int>();
      if (q.contains("error_order")) cfg.quad.error_order = q.at("error_order").get<int>();
    }
    cfg.seed = j.value("seed", std::uint64_t{1});
  } catch (const config_error&) {
    throw;
  } catch (const parse_error& e) {
    throw config_error(std::string("config: expression error: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw config_error(std::string("config: ") + e.what());
  } catch (const nlohmann::json::exception& e) {
    throw config_error(std::string("config: ") + e.what());
  }

  // Positivity of alpha, sampled on a 50x50 grid of the domain.
  PrimalMesh probe = cfg.make_mesh();
  if (!(cfg.alpha.min_value(probe) > 0.0))
    throw config_error("config: alpha must be strictly positive on the domain");
  return cfg;
}

inline ProblemConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw config_error("config not found: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

struct SolveResult {
  int m = 0, n = 0, dofs = 0;
  double h = 0.0;
  std::vector<double> node_x, node_y;  // interior node coordinates per DOF
  std::vector<double> solution;
  std::optional<ErrorReport> error;
};

inline SolveResult solve_on_mesh(const ProblemConfig& cfg, const PrimalMesh& mesh) {
  TrialSpace space(mesh, cfg.r);
  DualMesh dual = build_dual(mesh, cfg.r);
  SparseMatrixCSR A = assemble_matrix(space, dual, cfg.alpha, cfg.matrix_order());
  ExprPtr f = cfg.f;
  std::vector<double> b = assemble_rhs(
      dual, [&](double x, double y) { return expr_eval(f, x, y); }, cfg.rhs_order());
  std::vector<double> x = solve_direct(A, b);

  SolveResult res;
  res.m = mesh.m();
  res.n = mesh.n();
  res.h = mesh.h;
  res.dofs = space.ndof();
  res.solution = x;
  res.node_x.reserve(space.ndof());
  res.node_y.reserve(space.ndof());
  for (int iy = 1; iy <= space.ny(); ++iy)
    for (int ix = 1; ix <= space.nx(); ++ix) {
      res.node_x.push_back(space.nodes_x[ix]);
      res.node_y.push_back(space.nodes_y[iy]);
    }

  if (cfg.u_exact) {
    ScalarField u = field_from_expr(*cfg.u_exact);
    TrialFunction uP(space);
    uP.coeffs = x;
    auto [eh1, el2] = error_norms(u, uP, cfg.error_order());
    TrialFunction diff = interpolate(space, u.value);
    for (int i = 0; i < space.ndof(); ++i) diff.coeffs[i] -= x[i];
    ErrorReport rep;
    rep.h = mesh.h;
    rep.n = std::max(mesh.m(), mesh.n());
    rep.err_h1 = eh1;
    rep.err_l2 = el2;
    rep.err_supercloseness = h1_seminorm(diff);
    rep.dof_count = space.ndof();
    res.error = rep;
  }
  return res;
}

inline SolveResult run_solve(const ProblemConfig& cfg) {
  return solve_on_mesh(cfg, cfg.make_mesh());
}

struct ConvergenceStudy {
  std::vector<ErrorReport> reports;  // decreasing h
  std::optional<ConvergenceRates> rates;
};

inline ConvergenceStudy run_convergence(const ProblemConfig& cfg,
                                        const std::vector<int>& n_list) {
  if (!cfg.u_exact) throw config_error("convergence study requires u_exact in the config");
  for (std::size_t i = 0; i + 1 < n_list.size(); ++i)
    if (!(n_list[i] < n_list[i + 1])) throw config_error("n-list must be strictly increasing");
  ConvergenceStudy st;
  for (int n : n_list) {
    SolveResult r = solve_on_mesh(cfg, cfg.make_mesh(n));
    st.reports.push_back(*r.error);
  }
  if (st.reports.size() >= 2) st.rates = convergence_rates(st.reports);
  return st;
}

struct StabilityRow {
  int n = 0, dofs = 0;
  StabilityReport report;
};

inline std::vector<StabilityRow> run_stability(const ProblemConfig& cfg,
                                               const std::vector<int>& n_list, int probes) {
  if (probes < 1) throw config_error("stability study requires probes >= 1");
  std::vector<StabilityRow> rows;
  for (int n : n_list) {
    PrimalMesh mesh = cfg.make_mesh(n);
    TrialSpace space(mesh, cfg.r);
    DualMesh dual = build_dual(mesh, cfg.r);
    StabilityRow row;
    row.n = n;
    row.dofs = space.ndof();
    row.report = verify_stability(space, dual, cfg.alpha, probes, cfg.seed);
    rows.push_back(std::move(row));
  }
  return rows;
}

// ---- writers ----

inline nlohmann::json solve_to_json(const ProblemConfig& cfg, const SolveResult& res) {
  nlohmann::json j;
  j["schema_version"] = kSchemaVersion;
  j["tool_version"] = kToolVersion;
  j["config_hash"] = cfg.config_hash;
  j["timestamp"] = detail::iso_timestamp();
  j["r"] = cfg.r;
  j["m"] = res.m;
  j["n"] = res.n;
  j["h"] = res.h;
  j["dofs"] = res.dofs;
  j["node_x"] = res.node_x;
  j["node_y"] = res.node_y;
  j["solution"] = res.solution;
  if (res.error) {
    j["error"] = {{"err_h1", res.error->err_h1},
                  {"err_l2", res.error->err_l2},
                  {"err_supercloseness", res.error->err_supercloseness}};
  }
  return j;
}

inline std::string convergence_to_csv(const ConvergenceStudy& st) {
  std::ostringstream out;
  out << "n,h,dofs,err_h1,err_l2,err_supercloseness,order_h1,order_l2,order_sc\n";
  for (std::size_t i = 0; i < st.reports.size(); ++i) {
    const auto& r = st.reports[i];
    out << r.n << ',' << detail::fmt_double(r.h) << ',' << r.dof_count << ','
        << detail::fmt_double(r.err_h1) << ',' << detail::fmt_double(r.err_l2) << ','
        << detail::fmt_double(r.err_supercloseness);
    if (i >= 1 && st.rates) {
      out << ',' << detail::fmt_double(st.rates->order_h1[i - 1]) << ','
          << detail::fmt_double(st.rates->order_l2[i - 1]) << ','
          << detail::fmt_double(st.rates->order_sc[i - 1]);
    } else {
      out << ",,,";
    }
    out << '\n';
  }
  return out.str();
}

inline nlohmann::json stability_to_json(const ProblemConfig& cfg,
                                        const std::vector<StabilityRow>& rows, int probes) {
  nlohmann::json j;
  j["schema_version"] = kSchemaVersion;
  j["tool_version"] = kToolVersion;
  j["config_hash"] = cfg.config_hash;
  j["timestamp"] = detail::iso_timestamp();
  j["seed"] = cfg.seed;
  j["probes"] = probes;
  j["rows"] = nlohmann::json::array();
  for (const auto& row : rows) {
    nlohmann::json rj;
    rj["n"] = row.n;
    rj["dofs"] = row.dofs;
    rj["alpha_0"] = row.report.alpha_0;
    if (row.report.coercivity_ratio)
      rj["coercivity_ratio"] = *row.report.coercivity_ratio;
    else
      rj["coercivity_ratio"] = "unsupported-coefficient";
    rj["boundedness_ratio"] = row.report.boundedness_ratio;
    if (row.report.infsup_sigma)
      rj["infsup_sigma"] = *row.report.infsup_sigma;
    else
      rj["infsup_sigma"] = "skipped";
    j["rows"].push_back(std::move(rj));
  }
  return j;
}

inline void write_file(const std::string& path, const std::string& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw config_error("cannot open output file: " + path);
  out << data;
  if (!out) throw config_error("failed to write output file: " + path);
}

}  // namespace fvr
