#pragma once

// Trial space U^r_P: continuous piecewise Q_r functions on the primal mesh,
// nodal at the tensor Lobatto points, vanishing on the boundary.  Test space
// V_P': piecewise constants on interior control volumes of the dual mesh.
// DOF ordering is lexicographic with the x node index fastest.

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "fvr/mesh.hpp"
#include "fvr/quadrature.hpp"

namespace fvr {

struct TrialSpace {
  PrimalMesh mesh;
  int r = 0;
  std::vector<double> nodes_x, nodes_y;  // global Lobatto coordinates (sizes m*r+1, n*r+1)
  BarycentricBasis ref_basis;            // Lobatto basis on [-1,1], shared by every element
  std::vector<double> ref_diff;          // (r+1)^2 row-major: ref_diff[i][j] = l'_j(xi_i)

  TrialSpace(PrimalMesh m, int order)
      : mesh(std::move(m)), r(order), ref_basis(lobatto_points(order).nodes) {
    const auto& ref = ref_basis.nodes();
    build_axis_nodes(mesh.xb, ref, nodes_x);
    build_axis_nodes(mesh.yb, ref, nodes_y);
    ref_diff.assign((r + 1) * (r + 1), 0.0);
    std::vector<double> v(r + 1), d(r + 1);
    for (int i = 0; i <= r; ++i) {
      ref_basis.eval(ref[i], v, d);
      for (int j = 0; j <= r; ++j) ref_diff[i * (r + 1) + j] = d[j];
    }
  }

  int nx() const { return mesh.m() * r - 1; }  // interior nodes per axis
  int ny() const { return mesh.n() * r - 1; }
  int ndof() const { return nx() * ny(); }

  /// DOF id of the interior node (ix, iy); global node indices run 0..m*r,
  /// interior ones 1..m*r-1.
  int dof_index(int ix, int iy) const { return (iy - 1) * nx() + (ix - 1); }

  bool interior_node(int ix, int iy) const {
    return ix >= 1 && ix <= nx() && iy >= 1 && iy <= ny();
  }

  /// Global node index of local node k (0..r) in 0-based element e.
  static int global_node(int e, int k, int r) { return e * r + k; }

 private:
  static void build_axis_nodes(const std::vector<double>& breaks,
                               const std::vector<double>& ref, std::vector<double>& out) {
    int elems = static_cast<int>(breaks.size()) - 1;
    int r = static_cast<int>(ref.size()) - 1;
    out.assign(elems * r + 1, 0.0);
    for (int e = 0; e < elems; ++e) {
      double lo = breaks[e], hi = breaks[e + 1];
      for (int k = 0; k <= r; ++k)
        out[e * r + k] = 0.5 * (lo + hi + (hi - lo) * ref[k]);
    }
    out.front() = breaks.front();
    out.back() = breaks.back();
  }
};

struct TrialFunction {
  const TrialSpace* space = nullptr;
  std::vector<double> coeffs;  // interior nodal values, length ndof

  explicit TrialFunction(const TrialSpace& sp)
      : space(&sp), coeffs(sp.ndof(), 0.0) {}

  /// Nodal value at global node (ix, iy); boundary nodes are pinned to 0.
  double node_value(int ix, int iy) const {
    if (!space->interior_node(ix, iy)) return 0.0;
    return coeffs[space->dof_index(ix, iy)];
  }

  double eval(double x, double y) const {
    LocalEval ev(*this, x, y);
    double s = 0.0;
    for (int l = 0; l <= ev.r; ++l) {
      double row = 0.0;
      for (int k = 0; k <= ev.r; ++k) row += value_at(ev, k, l) * ev.vx[k];
      s += row * ev.vy[l];
    }
    return s;
  }

  std::pair<double, double> eval_grad(double x, double y) const {
    LocalEval ev(*this, x, y);
    double gx = 0.0, gy = 0.0;
    for (int l = 0; l <= ev.r; ++l) {
      double rx = 0.0, rv = 0.0;
      for (int k = 0; k <= ev.r; ++k) {
        double c = value_at(ev, k, l);
        rx += c * ev.dx[k];
        rv += c * ev.vx[k];
      }
      gx += rx * ev.vy[l];
      gy += rv * ev.dy[l];
    }
    return {gx, gy};
  }

  /// d2/dxdy, evaluated in the element owning (x, y).
  double eval_mixed(double x, double y) const {
    LocalEval ev(*this, x, y);
    double s = 0.0;
    for (int l = 0; l <= ev.r; ++l) {
      double row = 0.0;
      for (int k = 0; k <= ev.r; ++k) row += value_at(ev, k, l) * ev.dx[k];
      s += row * ev.dy[l];
    }
    return s;
  }

  struct SecondDerivs {
    double dxx, dxy, dyy;
  };

  /// Element-local second derivatives via the nodal differentiation matrix;
  /// exact, since each derivative is again a polynomial of degree <= r.
  SecondDerivs eval_second(double x, double y) const {
    LocalEval ev(*this, x, y);
    const TrialSpace& sp = *space;
    const int n = ev.r + 1;
    std::vector<double> C(n * n), DC(n * n, 0.0), D2C(n * n, 0.0);
    for (int k = 0; k < n; ++k)
      for (int l = 0; l < n; ++l) C[k * n + l] = value_at(ev, k, l);
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < n; ++k) {
        double d = sp.ref_diff[i * n + k];
        if (d == 0.0) continue;
        for (int l = 0; l < n; ++l) DC[i * n + l] += d * C[k * n + l];
      }
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < n; ++k) {
        double d = sp.ref_diff[i * n + k];
        if (d == 0.0) continue;
        for (int l = 0; l < n; ++l) D2C[i * n + l] += d * DC[k * n + l];
      }
    // ev.dx/ev.dy already carry one 2/h factor each; vx/vy carry none.
    double hx = sp.mesh.hx(ev.ex), hy = sp.mesh.hy(ev.ey);
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    std::vector<double> CDt(n * n, 0.0), CD2t(n * n, 0.0);
    for (int k = 0; k < n; ++k)
      for (int j = 0; j < n; ++j) {
        double s = 0.0;
        for (int l = 0; l < n; ++l) s += C[k * n + l] * sp.ref_diff[j * n + l];
        CDt[k * n + j] = s;
      }
    for (int k = 0; k < n; ++k)
      for (int j = 0; j < n; ++j) {
        double s = 0.0;
        for (int l = 0; l < n; ++l) s += CDt[k * n + l] * sp.ref_diff[j * n + l];
        CD2t[k * n + j] = s;
      }
    for (int k = 0; k < n; ++k)
      for (int l = 0; l < n; ++l) {
        sxx += D2C[k * n + l] * ev.vx[k] * ev.vy[l];
        sxy += C[k * n + l] * ev.dx[k] * ev.dy[l];
        syy += CD2t[k * n + l] * ev.vx[k] * ev.vy[l];
      }
    double fx = 2.0 / hx, fy = 2.0 / hy;
    return {sxx * fx * fx, sxy, syy * fy * fy};
  }

 private:
  struct LocalEval {
    int r, ex, ey;
    std::vector<double> vx, dx, vy, dy;

    LocalEval(const TrialFunction& f, double x, double y) {
      const TrialSpace& sp = *f.space;
      r = sp.r;
      ex = locate_element(sp.mesh.xb, x);
      ey = locate_element(sp.mesh.yb, y);
      double hx = sp.mesh.hx(ex), hy = sp.mesh.hy(ey);
      double xi = (2.0 * x - (sp.mesh.xb[ex] + sp.mesh.xb[ex + 1])) / hx;
      double eta = (2.0 * y - (sp.mesh.yb[ey] + sp.mesh.yb[ey + 1])) / hy;
      vx.resize(r + 1);
      dx.resize(r + 1);
      vy.resize(r + 1);
      dy.resize(r + 1);
      sp.ref_basis.eval(xi, vx, dx);
      sp.ref_basis.eval(eta, vy, dy);
      for (auto& d : dx) d *= 2.0 / hx;
      for (auto& d : dy) d *= 2.0 / hy;
    }
  };

  double value_at(const LocalEval& ev, int k, int l) const {
    int gx = TrialSpace::global_node(ev.ex, k, ev.r);
    int gy = TrialSpace::global_node(ev.ey, l, ev.r);
    return node_value(gx, gy);
  }
};

/// Lobatto interpolant: coeffs[j] = g(node_j) at interior nodes; boundary
/// nodes stay pinned to 0 regardless of g.
template <class F>
TrialFunction interpolate(const TrialSpace& space, F&& g) {
  TrialFunction v(space);
  for (int iy = 1; iy <= space.ny(); ++iy)
    for (int ix = 1; ix <= space.nx(); ++ix)
      v.coeffs[space.dof_index(ix, iy)] = g(space.nodes_x[ix], space.nodes_y[iy]);
  return v;
}

struct TestFunction {
  const DualMesh* dual = nullptr;
  std::vector<double> coeffs;  // interior (sx, sy) strip pairs, x fastest

  explicit TestFunction(const DualMesh& d)
      : dual(&d), coeffs(d.n_interior(), 0.0) {}

  /// Value on the control volume (sx, sy); boundary volumes are 0.
  double at(int sx, int sy) const {
    if (sx < 1 || sx > dual->x.interior() || sy < 1 || sy > dual->y.interior()) return 0.0;
    return coeffs[dual->row_index(sx, sy)];
  }
};

}  // namespace fvr
