// Acceptance gate: runs every top-level verification scenario and prints one
// PASS/FAIL line per criterion.  Exits nonzero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "fvr/study.hpp"

using namespace fvr;

namespace {

int g_failures = 0;

void report(int idx, const char* name, bool ok, const std::string& detail) {
  std::printf("[%s] criterion %d: %s%s%s\n", ok ? "PASS" : "FAIL", idx, name,
              detail.empty() ? "" : " -- ", detail.c_str());
  if (!ok) ++g_failures;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

ProblemConfig sine_config(int r) {
  ProblemConfig cfg;
  cfg.r = r;
  cfg.alpha = Coefficient::constant(1.0);
  cfg.f = expr_parse("2*pi^2*sin(pi*x)*sin(pi*y)");
  cfg.u_exact = expr_parse("sin(pi*x)*sin(pi*y)");
  return cfg;
}

void criterion1_convergence() {
  auto t0 = std::chrono::steady_clock::now();
  bool ok = true;
  std::ostringstream detail;
  for (int r : {2, 3, 4, 5}) {
    ConvergenceStudy st = run_convergence(sine_config(r), {4, 8, 16, 32});
    double oh1 = st.rates->order_h1.back();
    double ol2 = st.rates->order_l2.back();
    double osc = st.rates->order_sc.back();
    bool rok = oh1 >= r - 0.15 && oh1 <= r + 0.35 && ol2 >= r + 1 - 0.2 &&
               ol2 <= r + 1 + 0.5 && osc >= r + 0.75;
    if (!rok) ok = false;
    detail << "r=" << r << ": h1=" << fmt(oh1) << " l2=" << fmt(ol2) << " sc=" << fmt(osc)
           << (rok ? "; " : " (out of range); ");
  }
  double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (secs >= 120.0) ok = false;
  detail << "runtime=" << fmt(secs) << "s";
  report(1, "convergence orders for r=2..5", ok, detail.str());
}

void criterion2_exact_reproduction() {
  ProblemConfig cfg;
  cfg.r = 2;
  cfg.alpha = Coefficient::constant(1.0);
  cfg.f = expr_parse("2*(y*(1-y) + x*(1-x))");
  cfg.u_exact = expr_parse("x*(1-x)*y*(1-y)");
  bool ok = true;
  std::ostringstream detail;
  PrimalMesh meshes[] = {PrimalMesh::uniform(0, 1, 0, 1, 4, 4),
                         build_primal({0, 0.15, 0.4, 0.42, 0.9, 1.0}, {0, 0.3, 0.65, 1.0})};
  for (const PrimalMesh& mesh : meshes) {
    SolveResult res = solve_on_mesh(cfg, mesh);
    if (!(res.error->err_h1 <= 1e-9 && res.error->err_l2 <= 1e-10)) ok = false;
    detail << "err_h1=" << fmt(res.error->err_h1) << " err_l2=" << fmt(res.error->err_l2)
           << "; ";
  }
  report(2, "exact reproduction of a Q_2 solution", ok, detail.str());
}

void criterion3_coercivity() {
  NormalSampler rng(2024);
  bool ok = true;
  double worst_margin = 1e9;
  for (int r = 1; r <= 4; ++r)
    for (int m = 2; m <= 4; ++m)
      for (int n = 2; n <= 4; ++n)
        for (int graded = 0; graded <= 1; ++graded) {
          PrimalMesh mesh = PrimalMesh::uniform(0, 1, 0, 1, m, n);
          if (graded) {
            std::vector<double> xs{0.0}, ys{0.0};
            for (int i = 1; i < m; ++i) xs.push_back((i + 0.6 * (rng.uniform() - 0.5)) / m);
            for (int i = 1; i < n; ++i) ys.push_back((i + 0.6 * (rng.uniform() - 0.5)) / n);
            xs.push_back(1.0);
            ys.push_back(1.0);
            mesh = build_primal(xs, ys);
          }
          std::vector<std::vector<double>> grid(m, std::vector<double>(n));
          double amin = 1e9;
          for (auto& col : grid)
            for (double& v : col) {
              v = 0.5 + 3.5 * rng.uniform();
              amin = std::min(amin, v);
            }
          TrialSpace space(mesh, r);
          DualMesh dual = build_dual(mesh, r);
          SparseMatrixCSR A =
              assemble_matrix(space, dual, Coefficient::grid(grid), r + 2);
          for (int probe = 0; probe < 100; ++probe) {
            TrialFunction v(space);
            for (double& c : v.coeffs) c = rng();
            double vh1 = h1_seminorm(v);
            if (vh1 == 0.0) continue;
            TestFunction pv = build_pi(v, dual);
            double margin = apply_bilinear(A, v, pv) / (vh1 * vh1) - amin;
            worst_margin = std::min(worst_margin, margin);
            if (margin < -1e-9) ok = false;
          }
        }
  report(3, "coercivity a(v,Pi v) >= alpha_min |v|_1^2 over 100-probe suites", ok,
         "worst margin over min alpha: " + fmt(worst_margin));
}

void criterion4_pi_extension() {
  // The defining mixed second differences of Pi v must hold at every index of
  // the closed index range, i.e. also where boundary strips contribute zeros.
  NormalSampler rng(31415);
  bool ok = true;
  double worst = 0.0;
  PrimalMesh mesh = PrimalMesh::uniform(0, 1, 0, 1, 3, 3);
  for (int r : {2, 3, 4}) {
    TrialSpace space(mesh, r);
    DualMesh dual = build_dual(mesh, r);
    for (int probe = 0; probe < 5; ++probe) {
      TrialFunction v(space);
      for (double& c : v.coeffs) c = rng();
      TestFunction w = build_pi(v, dual);
      for (int sx = 1; sx <= dual.x.lines(); ++sx)
        for (int sy = 1; sy <= dual.y.lines(); ++sy) {
          double lhs = w.at(sx, sy) - w.at(sx - 1, sy) - w.at(sx, sy - 1) +
                       w.at(sx - 1, sy - 1);
          double rhs = dual.x.weights[sx - 1] * dual.y.weights[sy - 1] *
                       v.eval_mixed(dual.x.gauss[sx - 1], dual.y.gauss[sy - 1]);
          worst = std::max(worst, std::abs(lhs - rhs));
        }
    }
  }
  if (worst > 1e-11) ok = false;
  report(4, "Pi mapping condition on the full closed index set", ok,
         "max residual: " + fmt(worst));
}

void criterion5_boundedness_infsup() {
  bool ok = true;
  std::ostringstream detail;
  for (int r : {2, 3}) {
    double bmin = 1e9, bmax = 0.0, smin = 1e9, smax = 0.0;
    for (int n : {2, 4, 8}) {
      PrimalMesh mesh = PrimalMesh::uniform(0, 1, 0, 1, n, n);
      TrialSpace space(mesh, r);
      DualMesh dual = build_dual(mesh, r);
      StabilityReport rep =
          verify_stability(space, dual, Coefficient::constant(1.0), 30, 424242u);
      bmin = std::min(bmin, rep.boundedness_ratio);
      bmax = std::max(bmax, rep.boundedness_ratio);
      smin = std::min(smin, *rep.infsup_sigma);
      smax = std::max(smax, *rep.infsup_sigma);
    }
    if (!(bmax / bmin <= 2.0 && smin / smax >= 0.5)) ok = false;
    detail << "r=" << r << ": bound spread=" << fmt(bmax / bmin)
           << " sigma ratio=" << fmt(smin / smax) << "; ";
  }
  report(5, "boundedness and inf-sup stay flat under refinement", ok, detail.str());
}

void criterion6_quadrature_basis() {
  bool ok = true;
  std::ostringstream detail;

  double gauss_res = 0.0;
  for (int r = 1; r <= 10; ++r) {
    QuadratureRule rule = gauss_rule(r);
    for (int k = 0; k <= 2 * r - 1; ++k) {
      double got = 0.0;
      for (int p = 0; p < r; ++p) got += rule.weights[p] * std::pow(rule.nodes[p], k);
      double want = (k % 2 == 0) ? 2.0 / (k + 1) : 0.0;
      gauss_res = std::max(gauss_res, std::abs(got - want));
    }
  }
  if (gauss_res > 1e-12) ok = false;

  bool lobatto_ok = true;
  for (int r = 1; r <= 8; ++r) {
    std::vector<double> lob = lobatto_points(r).nodes;
    QuadratureRule g = gauss_rule(r);
    if (lob.front() != -1.0 || lob.back() != 1.0) lobatto_ok = false;
    for (int i = 0; i < r; ++i)  // exactly one Gauss point per Lobatto gap
      if (!(lob[i] < g.nodes[i] && g.nodes[i] < lob[i + 1])) lobatto_ok = false;
  }
  if (!lobatto_ok) ok = false;

  double pu_res = 0.0;
  {
    BarycentricBasis basis(lobatto_points(5).nodes);
    std::vector<double> vals(6), derivs(6);
    for (int t = 0; t <= 40; ++t) {
      double x = -1.0 + 2.0 * t / 40.0;
      basis.eval(x, vals, derivs);
      double s = 0.0;
      for (double v : vals) s += v;
      pu_res = std::max(pu_res, std::abs(s - 1.0));
    }
  }
  if (pu_res > 1e-13) ok = false;

  double diff_res = 0.0;
  {
    ExprPtr e = expr_parse("sin(pi*x)*exp(y/2) + x^3*y - cos(x*y)");
    ExprPtr ex = expr_diff(e, Var::X), ey = expr_diff(e, Var::Y);
    NormalSampler rng(5);
    for (int t = 0; t < 20; ++t) {
      double x = rng.uniform() * 2 - 1, y = rng.uniform() * 2 - 1, eps = 1e-6;
      double fdx = (expr_eval(e, x + eps, y) - expr_eval(e, x - eps, y)) / (2 * eps);
      double fdy = (expr_eval(e, x, y + eps) - expr_eval(e, x, y - eps)) / (2 * eps);
      diff_res = std::max(diff_res, std::abs(fdx - expr_eval(ex, x, y)) /
                                        std::max(1.0, std::abs(fdx)));
      diff_res = std::max(diff_res, std::abs(fdy - expr_eval(ey, x, y)) /
                                        std::max(1.0, std::abs(fdy)));
    }
  }
  if (diff_res > 1e-6) ok = false;

  double quad_res = 0.0;
  {
    PrimalMesh mesh = build_primal({0, 0.3, 1.0}, {0, 0.7, 1.0});
    Coefficient alpha = Coefficient::grid({{1.0, 4.0}, {2.5, 0.5}});
    for (int r : {1, 2, 3}) {
      TrialSpace space(mesh, r);
      DualMesh dual = build_dual(mesh, r);
      SparseMatrixCSR A = assemble_matrix(space, dual, alpha, r);
      SparseMatrixCSR B = assemble_matrix(space, dual, alpha, r + 3);
      double scale = 0.0;
      for (double v : A.vals) scale = std::max(scale, std::abs(v));
      for (std::size_t i = 0; i < A.vals.size(); ++i)
        quad_res = std::max(quad_res, std::abs(A.vals[i] - B.vals[i]) / scale);
    }
  }
  if (quad_res > 1e-13) ok = false;

  detail << "gauss=" << fmt(gauss_res) << " pu=" << fmt(pu_res) << " diff=" << fmt(diff_res)
         << " quad=" << fmt(quad_res) << " lobatto=" << (lobatto_ok ? "ok" : "bad");
  report(6, "quadrature, basis, and expression suites", ok, detail.str());
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string strip_timestamp(const std::string& text) {
  std::istringstream in(text);
  std::ostringstream out;
  std::string line;
  while (std::getline(in, line))
    if (line.find("\"timestamp\"") == std::string::npos) out << line << '\n';
  return out.str();
}

void criterion7_determinism() {
#ifndef FVCLI_PATH
  report(7, "byte-identical reruns", false, "CLI path not configured");
#else
  std::ofstream("acc_cfg.json") << R"json({
    "r": 2,
    "alpha": {"grid": [[1.0, 3.0], [3.0, 1.0]]},
    "f": "2*pi^2*sin(pi*x)*sin(pi*y)",
    "u_exact": "sin(pi*x)*sin(pi*y)",
    "seed": 9
  })json";
  std::string cli = FVCLI_PATH;
  auto run = [&](const std::string& args) {
    return std::system((cli + " " + args + " --quiet").c_str()) == 0;
  };
  bool ok = true;
  ok &= run("convergence --config acc_cfg.json --out acc_c1.csv --n-list 4,8");
  ok &= run("convergence --config acc_cfg.json --out acc_c2.csv --n-list 4,8");
  ok &= slurp("acc_c1.csv") == slurp("acc_c2.csv");
  ok &= run("stability --config acc_cfg.json --out acc_s1.json --n-list 2,4 --probes 8");
  ok &= run("stability --config acc_cfg.json --out acc_s2.json --n-list 2,4 --probes 8");
  ok &= strip_timestamp(slurp("acc_s1.json")) == strip_timestamp(slurp("acc_s2.json"));
  ok &= run("solve --config acc_cfg.json --out acc_v1.json");
  ok &= run("solve --config acc_cfg.json --out acc_v2.json");
  ok &= strip_timestamp(slurp("acc_v1.json")) == strip_timestamp(slurp("acc_v2.json"));
  report(7, "byte-identical reruns (timestamp excluded)", ok, "");
#endif
}

}  // namespace

int main() {
  criterion1_convergence();
  criterion2_exact_reproduction();
  criterion3_coercivity();
  criterion4_pi_extension();
  criterion5_boundedness_infsup();
  criterion6_quadrature_basis();
  criterion7_determinism();
  if (g_failures == 0) {
    std::printf("all acceptance criteria passed\n");
    return 0;
  }
  std::printf("%d acceptance criteria FAILED\n", g_failures);
  return 1;
}
