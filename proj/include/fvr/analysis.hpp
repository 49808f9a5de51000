#pragma once

// Error norms, mesh-dependent seminorms, the trial-to-test mapping used for
// the stability analysis, inf-sup probing, and convergence-rate extraction.

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <stdexcept>
#include <vector>

#include "fvr/assembly.hpp"
#include "fvr/expr.hpp"
#include "fvr/linalg.hpp"
#include "fvr/mesh.hpp"
#include "fvr/quadrature.hpp"
#include "fvr/space.hpp"

namespace fvr {

struct ScalarField {
  std::function<double(double, double)> value, dx, dy, dxx, dxy, dyy;
};

inline ScalarField field_from_expr(const ExprPtr& e) {
  ExprPtr ex = expr_diff(e, Var::X), ey = expr_diff(e, Var::Y);
  ExprPtr exx = expr_diff(ex, Var::X), exy = expr_diff(ex, Var::Y), eyy = expr_diff(ey, Var::Y);
  auto fn = [](ExprPtr q) {
    return [q](double x, double y) { return expr_eval(q, x, y); };
  };
  return {fn(e), fn(ex), fn(ey), fn(exx), fn(exy), fn(eyy)};
}

struct ErrorReport {
  double h = 0.0;
  int n = 0;  // subdivisions per axis
  double err_h1 = 0.0;
  double err_l2 = 0.0;
  double err_supercloseness = 0.0;
  std::optional<double> err_broken_h2;
  int dof_count = 0;
};

struct StabilityReport {
  std::optional<double> coercivity_ratio;  // min over probes of a(v,Pi v)/|v|_1^2
  double boundedness_ratio = 0.0;          // max over probes of |Pi v|_P' / |v|_1
  std::optional<double> infsup_sigma;      // sigma_min of the whitened system
  double alpha_0 = 0.0;
  std::uint64_t seed = 0;
  int n_probes = 0;
};

/// Deterministic standard-normal sampler (Box-Muller over mt19937_64
/// uniforms), identical across standard library implementations.
class NormalSampler {
 public:
  explicit NormalSampler(std::uint64_t seed) : eng_(seed) {}

  double operator()() {
    if (have_) {
      have_ = false;
      return spare_;
    }
    double u1;
    do {
      u1 = uniform();
    } while (u1 <= 1e-300);
    double u2 = uniform();
    double m = std::sqrt(-2.0 * std::log(u1));
    spare_ = m * std::sin(2.0 * M_PI * u2);
    have_ = true;
    return m * std::cos(2.0 * M_PI * u2);
  }

  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

 private:
  std::mt19937_64 eng_;
  bool have_ = false;
  double spare_ = 0.0;
};

/// Dual-edge seminorm |w|_P' by the strip-difference loop: every interior
/// dual edge contributes its squared jump (h_E^-1 * integral of [w]^2 over E
/// collapses to [w]^2 for piecewise constants); jumps against the zero
/// boundary strips are included.
inline double seminorm_dual(const TestFunction& w) {
  const DualMesh& d = *w.dual;
  double s = 0.0;
  for (int sx = 1; sx <= d.x.lines(); ++sx)
    for (int sy = 1; sy <= d.y.interior(); ++sy) {
      double j = w.at(sx, sy) - w.at(sx - 1, sy);
      s += j * j;
    }
  for (int sy = 1; sy <= d.y.lines(); ++sy)
    for (int sx = 1; sx <= d.x.interior(); ++sx) {
      double j = w.at(sx, sy) - w.at(sx, sy - 1);
      s += j * j;
    }
  return std::sqrt(s);
}

/// H1 seminorm of a trial function by per-element tensor Gauss quadrature
/// (q = r+1 is exact).
inline double h1_seminorm(const TrialFunction& v, int q = 0) {
  const TrialSpace& sp = *v.space;
  if (q <= 0) q = sp.r + 1;
  const QuadratureRule rule = gauss_rule(q);
  double s = 0.0;
  for (int ey = 0; ey < sp.mesh.n(); ++ey)
    for (int ex = 0; ex < sp.mesh.m(); ++ex) {
      double x0 = sp.mesh.xb[ex], hx = sp.mesh.hx(ex);
      double y0 = sp.mesh.yb[ey], hy = sp.mesh.hy(ey);
      for (int p = 0; p < q; ++p)
        for (int t = 0; t < q; ++t) {
          double x = x0 + 0.5 * hx * (1.0 + rule.nodes[p]);
          double y = y0 + 0.5 * hy * (1.0 + rule.nodes[t]);
          auto [gx, gy] = v.eval_grad(x, y);
          s += 0.25 * hx * hy * rule.weights[p] * rule.weights[t] * (gx * gx + gy * gy);
        }
    }
  return std::sqrt(s);
}

/// Broken H2 seminorm |.|_P of a function given through its derivatives:
/// sum over elements of |v|_1^2 + h_tau^2 * |v|_2^2 with the mixed term
/// counted twice; derivs(x,y) must return {dx, dy, dxx, dxy, dyy}.
struct Deriv2 {
  double dx, dy, dxx, dxy, dyy;
};

template <class F>
double seminorm_broken_h2(const PrimalMesh& mesh, F&& derivs, int q) {
  const QuadratureRule rule = gauss_rule(q);
  double s = 0.0;
  for (int ey = 0; ey < mesh.n(); ++ey)
    for (int ex = 0; ex < mesh.m(); ++ex) {
      double x0 = mesh.xb[ex], hx = mesh.hx(ex);
      double y0 = mesh.yb[ey], hy = mesh.hy(ey);
      double ht2 = hx * hx + hy * hy;  // squared element diameter
      for (int p = 0; p < q; ++p)
        for (int t = 0; t < q; ++t) {
          double x = x0 + 0.5 * hx * (1.0 + rule.nodes[p]);
          double y = y0 + 0.5 * hy * (1.0 + rule.nodes[t]);
          Deriv2 d = derivs(x, y);
          double h1 = d.dx * d.dx + d.dy * d.dy;
          double h2 = d.dxx * d.dxx + 2.0 * d.dxy * d.dxy + d.dyy * d.dyy;
          s += 0.25 * hx * hy * rule.weights[p] * rule.weights[t] * (h1 + ht2 * h2);
        }
    }
  return std::sqrt(s);
}

inline double seminorm_broken_h2(const ScalarField& v, const PrimalMesh& mesh, int q) {
  return seminorm_broken_h2(
      mesh,
      [&](double x, double y) {
        return Deriv2{v.dx(x, y), v.dy(x, y), v.dxx(x, y), v.dxy(x, y), v.dyy(x, y)};
      },
      q);
}

/// H1-seminorm and L2-norm of u - u_P by per-element tensor Gauss quadrature.
inline std::pair<double, double> error_norms(const ScalarField& u, const TrialFunction& uP,
                                             int q) {
  const TrialSpace& sp = *uP.space;
  if (q < sp.r + 3) throw std::invalid_argument("error_norms: quadrature order must be >= r+3");
  const QuadratureRule rule = gauss_rule(q);
  double sh1 = 0.0, sl2 = 0.0;
  for (int ey = 0; ey < sp.mesh.n(); ++ey)
    for (int ex = 0; ex < sp.mesh.m(); ++ex) {
      double x0 = sp.mesh.xb[ex], hx = sp.mesh.hx(ex);
      double y0 = sp.mesh.yb[ey], hy = sp.mesh.hy(ey);
      for (int p = 0; p < q; ++p)
        for (int t = 0; t < q; ++t) {
          double x = x0 + 0.5 * hx * (1.0 + rule.nodes[p]);
          double y = y0 + 0.5 * hy * (1.0 + rule.nodes[t]);
          double w = 0.25 * hx * hy * rule.weights[p] * rule.weights[t];
          auto [gx, gy] = uP.eval_grad(x, y);
          double dx = u.dx(x, y) - gx, dy = u.dy(x, y) - gy;
          double dv = u.value(x, y) - uP.eval(x, y);
          sh1 += w * (dx * dx + dy * dy);
          sl2 += w * dv * dv;
        }
    }
  return {std::sqrt(sh1), std::sqrt(sl2)};
}

/// The trial-to-test mapping: the coefficient on the interior control volume
/// (sx, sy) is the 2D prefix sum, over all Gauss points up to and including
/// (sx, sy), of the scaled Gauss weights times the mixed second derivative of
/// v at that Gauss point (evaluated in the element owning the point).  This
/// is the closed form of the telescoping construction with zero boundary
/// volumes.
inline TestFunction build_pi(const TrialFunction& v, const DualMesh& dual) {
  const int nx = dual.x.lines(), ny = dual.y.lines();
  std::vector<double> prefix((nx + 1) * (ny + 1), 0.0);
  auto P = [&](int i, int j) -> double& { return prefix[i * (ny + 1) + j]; };
  for (int sx = 1; sx <= nx; ++sx)
    for (int sy = 1; sy <= ny; ++sy) {
      double m = dual.x.weights[sx - 1] * dual.y.weights[sy - 1] *
                 v.eval_mixed(dual.x.gauss[sx - 1], dual.y.gauss[sy - 1]);
      P(sx, sy) = m + P(sx - 1, sy) + P(sx, sy - 1) - P(sx - 1, sy - 1);
    }
  TestFunction w(dual);
  for (int sy = 1; sy <= dual.y.interior(); ++sy)
    for (int sx = 1; sx <= dual.x.interior(); ++sx)
      w.coeffs[dual.row_index(sx, sy)] = P(sx, sy);
  return w;
}

/// Gram matrix of the H1 seminorm on the trial space (dense; for whitening
/// at desk scale only).  Exact via (r+1)-point Gauss per axis.
inline DenseMatrix trial_h1_gram(const TrialSpace& sp) {
  const int r = sp.r, n = r + 1, q = r + 1;
  const QuadratureRule rule = gauss_rule(q);
  DenseMatrix H = DenseMatrix::Zero(sp.ndof(), sp.ndof());

  // Reference 1D tables at quadrature points.
  std::vector<double> V(q * n), D(q * n), tmpv(n), tmpd(n);
  for (int p = 0; p < q; ++p) {
    sp.ref_basis.eval(rule.nodes[p], tmpv, tmpd);
    for (int k = 0; k < n; ++k) {
      V[p * n + k] = tmpv[k];
      D[p * n + k] = tmpd[k];
    }
  }
  auto mats_1d = [&](double h, std::vector<double>& M, std::vector<double>& S) {
    M.assign(n * n, 0.0);
    S.assign(n * n, 0.0);
    for (int p = 0; p < q; ++p) {
      double wm = 0.5 * h * rule.weights[p];
      double ws = (2.0 / h) * rule.weights[p];  // 0.5*h * (2/h)^2
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
          M[a * n + b] += wm * V[p * n + a] * V[p * n + b];
          S[a * n + b] += ws * D[p * n + a] * D[p * n + b];
        }
    }
  };

  std::vector<double> Mx, Sx, My, Sy;
  for (int ey = 0; ey < sp.mesh.n(); ++ey) {
    mats_1d(sp.mesh.hy(ey), My, Sy);
    for (int ex = 0; ex < sp.mesh.m(); ++ex) {
      mats_1d(sp.mesh.hx(ex), Mx, Sx);
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          int gx = TrialSpace::global_node(ex, k, r), gy = TrialSpace::global_node(ey, l, r);
          if (!sp.interior_node(gx, gy)) continue;
          int row = sp.dof_index(gx, gy);
          for (int k2 = 0; k2 < n; ++k2)
            for (int l2 = 0; l2 < n; ++l2) {
              int gx2 = TrialSpace::global_node(ex, k2, r),
                  gy2 = TrialSpace::global_node(ey, l2, r);
              if (!sp.interior_node(gx2, gy2)) continue;
              H(row, sp.dof_index(gx2, gy2)) +=
                  Sx[k * n + k2] * My[l * n + l2] + Mx[k * n + k2] * Sy[l * n + l2];
            }
        }
    }
  }
  return H;
}

/// Gram matrix of |.|_P' on the test space: the dual-edge jump quadratic form.
inline DenseMatrix test_dual_gram(const DualMesh& dual) {
  const int nd = dual.n_interior();
  DenseMatrix Dm = DenseMatrix::Zero(nd, nd);
  auto idx = [&](int sx, int sy) -> int {
    if (sx < 1 || sx > dual.x.interior() || sy < 1 || sy > dual.y.interior()) return -1;
    return dual.row_index(sx, sy);
  };
  auto add_jump = [&](int a, int b) {
    if (a >= 0) Dm(a, a) += 1.0;
    if (b >= 0) Dm(b, b) += 1.0;
    if (a >= 0 && b >= 0) {
      Dm(a, b) -= 1.0;
      Dm(b, a) -= 1.0;
    }
  };
  for (int sx = 1; sx <= dual.x.lines(); ++sx)
    for (int sy = 1; sy <= dual.y.interior(); ++sy) add_jump(idx(sx - 1, sy), idx(sx, sy));
  for (int sy = 1; sy <= dual.y.lines(); ++sy)
    for (int sx = 1; sx <= dual.x.interior(); ++sx) add_jump(idx(sx, sy - 1), idx(sx, sy));
  return Dm;
}

/// sigma_min of L_D^-1 A L_H^-T: the discrete inf-sup value of the bilinear
/// form under the |.|_1 (trial) and |.|_P' (test) norms.
inline double whitened_sigma_min(const DenseMatrix& A, const DenseMatrix& H,
                                 const DenseMatrix& D) {
  DenseMatrix LH = cholesky_factor(H);
  DenseMatrix LD = cholesky_factor(D);
  DenseMatrix B = LD.triangularView<Eigen::Lower>().solve(A);
  DenseMatrix Bt = LH.triangularView<Eigen::Lower>().solve(B.transpose());
  return smallest_singular_value(Bt.transpose());
}

/// Draws seeded random trial functions and measures the stability quantities:
/// worst-case coercivity of a(v, Pi v) against |v|_1^2 (piecewise-constant
/// alpha only), the boundedness ratio |Pi v|_P' / |v|_1, and, when the system
/// is small enough for dense work, the whitened sigma_min.
inline StabilityReport verify_stability(const TrialSpace& space, const DualMesh& dual,
                                        const Coefficient& alpha, int n_probes,
                                        std::uint64_t seed, int dense_limit = 2000) {
  if (n_probes < 1) throw std::invalid_argument("verify_stability: need at least one probe");
  StabilityReport rep;
  rep.seed = seed;
  rep.n_probes = n_probes;
  rep.alpha_0 = alpha.min_value(space.mesh);

  SparseMatrixCSR A = assemble_matrix(space, dual, alpha, space.r + 2);
  NormalSampler rng(seed);
  const bool pcw = alpha.is_piecewise_constant();
  double min_coerc = std::numeric_limits<double>::infinity();
  double max_bound = 0.0;
  for (int i = 0; i < n_probes; ++i) {
    TrialFunction v(space);
    for (double& c : v.coeffs) c = rng();
    double vh1 = h1_seminorm(v);
    if (vh1 == 0.0) continue;  // only possible for the trivial space
    TestFunction pv = build_pi(v, dual);
    max_bound = std::max(max_bound, seminorm_dual(pv) / vh1);
    if (pcw) min_coerc = std::min(min_coerc, apply_bilinear(A, v, pv) / (vh1 * vh1));
  }
  rep.boundedness_ratio = max_bound;
  if (pcw && min_coerc < std::numeric_limits<double>::infinity()) rep.coercivity_ratio = min_coerc;

  if (space.ndof() > 0 && space.ndof() <= dense_limit) {
    rep.infsup_sigma =
        whitened_sigma_min(A.to_dense(), trial_h1_gram(space), test_dual_gram(dual));
  }
  return rep;
}

/// Measured continuity constant: max over probe pairs of
/// a(v, w) / (|v|_P |w|_P').
inline double measured_continuity(const TrialSpace& space, const DualMesh& dual,
                                  const Coefficient& alpha, int n_probes, std::uint64_t seed) {
  SparseMatrixCSR A = assemble_matrix(space, dual, alpha, space.r + 2);
  NormalSampler rng(seed);
  double best = 0.0;
  for (int i = 0; i < n_probes; ++i) {
    TrialFunction v(space);
    for (double& c : v.coeffs) c = rng();
    TestFunction w(dual);
    for (double& c : w.coeffs) c = rng();
    double vp = seminorm_broken_h2(
        space.mesh,
        [&](double x, double y) {
          auto [gx, gy] = v.eval_grad(x, y);
          auto d2 = v.eval_second(x, y);
          return Deriv2{gx, gy, d2.dxx, d2.dxy, d2.dyy};
        },
        space.r + 1);
    double wp = seminorm_dual(w);
    if (vp > 0.0 && wp > 0.0)
      best = std::max(best, std::abs(apply_bilinear(A, v, w)) / (vp * wp));
  }
  return best;
}

struct ConvergenceRates {
  std::vector<double> order_h1, order_l2, order_sc;  // entry i: between reports i and i+1
};

/// log-ratio convergence orders between consecutive reports (decreasing h);
/// exact reproduction (zero error) is reported as +infinity.
inline ConvergenceRates convergence_rates(const std::vector<ErrorReport>& reports) {
  if (reports.size() < 2)
    throw std::invalid_argument("convergence_rates: need at least two reports");
  ConvergenceRates out;
  auto order = [](double e0, double e1, double h0, double h1) {
    if (e1 == 0.0 || e0 == 0.0) return std::numeric_limits<double>::infinity();
    return std::log(e0 / e1) / std::log(h0 / h1);
  };
  for (std::size_t i = 0; i + 1 < reports.size(); ++i) {
    const auto& a = reports[i];
    const auto& b = reports[i + 1];
    if (!(a.h > b.h))
      throw std::invalid_argument("convergence_rates: reports must have strictly decreasing h");
    out.order_h1.push_back(order(a.err_h1, b.err_h1, a.h, b.h));
    out.order_l2.push_back(order(a.err_l2, b.err_l2, a.h, b.h));
    out.order_sc.push_back(order(a.err_supercloseness, b.err_supercloseness, a.h, b.h));
  }
  return out;
}

}  // namespace fvr
