#pragma once

// Petrov-Galerkin assembly.  Rows are interior control volumes, columns are
// trial DOFs.  Each entry collects the jump expansion of the flux form: for
// every Gauss line, the line integral of alpha * dv/dn over each strip piece
// is added to the row on one side of the line and subtracted from the row on
// the other side; boundary strips carry no row.

#include <functional>
#include <stdexcept>
#include <variant>
#include <vector>

#include "fvr/linalg.hpp"
#include "fvr/mesh.hpp"
#include "fvr/quadrature.hpp"
#include "fvr/space.hpp"

namespace fvr {

/// Diffusion coefficient: a constant, a per-element grid of constants, or a
/// smooth scalar field.  Grid values are indexed by primal element and tile
/// periodically when the grid is smaller than the mesh.
class Coefficient {
 public:
  static Coefficient constant(double v) {
    Coefficient c;
    c.data_ = v;
    return c;
  }

  /// values[i][j]: value on primal element column i (x) and row j (y).
  static Coefficient grid(std::vector<std::vector<double>> values) {
    if (values.empty() || values.front().empty())
      throw std::invalid_argument("Coefficient::grid: empty grid");
    for (const auto& col : values)
      if (col.size() != values.front().size())
        throw std::invalid_argument("Coefficient::grid: ragged grid");
    Coefficient c;
    c.data_ = std::move(values);
    return c;
  }

  static Coefficient field(std::function<double(double, double)> f) {
    Coefficient c;
    c.data_ = std::move(f);
    return c;
  }

  bool is_piecewise_constant() const {
    return !std::holds_alternative<std::function<double(double, double)>>(data_);
  }

  /// Value at (x, y) inside the 0-based primal element (ex, ey).
  double at(int ex, int ey, double x, double y) const {
    if (const double* v = std::get_if<double>(&data_)) return *v;
    if (const auto* g = std::get_if<Grid>(&data_)) {
      int gm = static_cast<int>(g->size());
      int gn = static_cast<int>(g->front().size());
      return (*g)[ex % gm][ey % gn];
    }
    return std::get<std::function<double(double, double)>>(data_)(x, y);
  }

  /// Lower bound alpha_0; fields are sampled on a 50x50 grid.
  double min_value(const PrimalMesh& mesh) const {
    if (const double* v = std::get_if<double>(&data_)) return *v;
    if (const auto* g = std::get_if<Grid>(&data_)) {
      double mn = (*g)[0][0];
      for (const auto& col : *g)
        for (double v : col) mn = std::min(mn, v);
      return mn;
    }
    const auto& f = std::get<std::function<double(double, double)>>(data_);
    double a = mesh.xb.front(), b = mesh.xb.back(), c = mesh.yb.front(), d = mesh.yb.back();
    double mn = f(a, c);
    for (int i = 0; i < 50; ++i)
      for (int j = 0; j < 50; ++j)
        mn = std::min(mn, f(a + (b - a) * (i + 0.5) / 50, c + (d - c) * (j + 0.5) / 50));
    return mn;
  }

 private:
  using Grid = std::vector<std::vector<double>>;
  std::variant<double, Grid, std::function<double(double, double)>> data_;
};

inline SparseMatrixCSR assemble_matrix(const TrialSpace& space, const DualMesh& dual,
                                       const Coefficient& alpha, int q) {
  const int r = space.r;
  if (dual.r != r) throw std::invalid_argument("assemble_matrix: space/dual order mismatch");
  if (q < r) throw std::invalid_argument("assemble_matrix: quadrature order must be >= r");

  const PrimalMesh& mesh = space.mesh;
  const int nxi = dual.x.interior(), nyi = dual.y.interior();
  const QuadratureRule rule = gauss_rule(q);

  std::vector<Triplet> triplets;
  triplets.reserve(static_cast<std::size_t>(dual.n_interior()) * (r + 1) * (r + 1) * 4);

  std::vector<double> vref(r + 1), dref(r + 1);
  std::vector<double> dline(r + 1);                          // basis derivative along the line
  std::vector<double> local((r + 1) * (r + 1));              // per-piece flux accumulators
  std::vector<double> vq((r + 1)), dq((r + 1));

  auto check_alpha = [](double a) {
    if (!(a > 0.0)) throw std::invalid_argument("assemble_matrix: coefficient not strictly positive");
  };

  // Vertical Gauss lines: integrate alpha * dv/dx in y over each strip piece.
  for (int sx = 1; sx <= dual.x.lines(); ++sx) {
    const int ex = dual.x.line_element(sx);
    const double gx = dual.x.gauss[sx - 1];
    const double hx = mesh.hx(ex);
    const double xi = (2.0 * gx - (mesh.xb[ex] + mesh.xb[ex + 1])) / hx;
    space.ref_basis.eval(xi, vref, dref);
    for (int k = 0; k <= r; ++k) dline[k] = dref[k] * 2.0 / hx;

    const bool has_right = sx <= nxi;
    const bool has_left = sx - 1 >= 1;
    if (!has_right && !has_left) continue;

    for (int sy = 1; sy <= nyi; ++sy) {
      for (const auto& piece : dual.y.strip_pieces(sy)) {
        const int ey = piece.elem;
        const double hy = mesh.hy(ey);
        std::fill(local.begin(), local.end(), 0.0);
        for (int p = 0; p < q; ++p) {
          const double yq = 0.5 * (piece.lo + piece.hi + (piece.hi - piece.lo) * rule.nodes[p]);
          const double wq = 0.5 * (piece.hi - piece.lo) * rule.weights[p];
          const double a = alpha.at(ex, ey, gx, yq);
          check_alpha(a);
          const double eta = (2.0 * yq - (mesh.yb[ey] + mesh.yb[ey + 1])) / hy;
          space.ref_basis.eval(eta, vq, dq);
          for (int l = 0; l <= r; ++l) {
            const double f = wq * a * vq[l];
            for (int k = 0; k <= r; ++k) local[l * (r + 1) + k] += f * dline[k];
          }
        }
        for (int l = 0; l <= r; ++l) {
          const int gny = TrialSpace::global_node(ey, l, r);
          for (int k = 0; k <= r; ++k) {
            const int gnx = TrialSpace::global_node(ex, k, r);
            if (!space.interior_node(gnx, gny)) continue;
            const int col = space.dof_index(gnx, gny);
            const double F = local[l * (r + 1) + k];
            if (has_right) triplets.push_back({dual.row_index(sx, sy), col, F});
            if (has_left) triplets.push_back({dual.row_index(sx - 1, sy), col, -F});
          }
        }
      }
    }
  }

  // Horizontal Gauss lines: integrate alpha * dv/dy in x.
  for (int sy = 1; sy <= dual.y.lines(); ++sy) {
    const int ey = dual.y.line_element(sy);
    const double gy = dual.y.gauss[sy - 1];
    const double hy = mesh.hy(ey);
    const double eta = (2.0 * gy - (mesh.yb[ey] + mesh.yb[ey + 1])) / hy;
    space.ref_basis.eval(eta, vref, dref);
    for (int l = 0; l <= r; ++l) dline[l] = dref[l] * 2.0 / hy;

    const bool has_upper = sy <= nyi;
    const bool has_lower = sy - 1 >= 1;
    if (!has_upper && !has_lower) continue;

    for (int sx = 1; sx <= nxi; ++sx) {
      for (const auto& piece : dual.x.strip_pieces(sx)) {
        const int ex = piece.elem;
        const double hx = mesh.hx(ex);
        std::fill(local.begin(), local.end(), 0.0);
        for (int p = 0; p < q; ++p) {
          const double xq = 0.5 * (piece.lo + piece.hi + (piece.hi - piece.lo) * rule.nodes[p]);
          const double wq = 0.5 * (piece.hi - piece.lo) * rule.weights[p];
          const double a = alpha.at(ex, ey, xq, gy);
          check_alpha(a);
          const double xi = (2.0 * xq - (mesh.xb[ex] + mesh.xb[ex + 1])) / hx;
          space.ref_basis.eval(xi, vq, dq);
          for (int k = 0; k <= r; ++k) {
            const double f = wq * a * vq[k];
            for (int l = 0; l <= r; ++l) local[l * (r + 1) + k] += f * dline[l];
          }
        }
        for (int l = 0; l <= r; ++l) {
          const int gny = TrialSpace::global_node(ey, l, r);
          for (int k = 0; k <= r; ++k) {
            const int gnx = TrialSpace::global_node(ex, k, r);
            if (!space.interior_node(gnx, gny)) continue;
            const int col = space.dof_index(gnx, gny);
            const double F = local[l * (r + 1) + k];
            if (has_upper) triplets.push_back({dual.row_index(sx, sy), col, F});
            if (has_lower) triplets.push_back({dual.row_index(sx, sy - 1), col, -F});
          }
        }
      }
    }
  }

  return SparseMatrixCSR::from_triplets(dual.n_interior(), space.ndof(), std::move(triplets));
}

/// Right-hand side: integral of f over each interior control volume by
/// per-piece tensor Gauss quadrature.
template <class F>
std::vector<double> assemble_rhs(const DualMesh& dual, F&& f, int q) {
  if (q < dual.r + 1)
    throw std::invalid_argument("assemble_rhs: quadrature order must be >= r+1");
  const QuadratureRule rule = gauss_rule(q);
  std::vector<double> b(dual.n_interior(), 0.0);
  for (int sy = 1; sy <= dual.y.interior(); ++sy) {
    for (int sx = 1; sx <= dual.x.interior(); ++sx) {
      double s = 0.0;
      for (const auto& rect : dual.control_volume_pieces(sx, sy)) {
        const double cx = 0.5 * (rect.x0 + rect.x1), rx = 0.5 * (rect.x1 - rect.x0);
        const double cy = 0.5 * (rect.y0 + rect.y1), ry = 0.5 * (rect.y1 - rect.y0);
        for (int p = 0; p < q; ++p)
          for (int t = 0; t < q; ++t)
            s += rx * ry * rule.weights[p] * rule.weights[t] *
                 f(cx + rx * rule.nodes[p], cy + ry * rule.nodes[t]);
      }
      b[dual.row_index(sx, sy)] = s;
    }
  }
  return b;
}

/// w^T A v; realizes the bilinear form on coefficient vectors.
inline double apply_bilinear(const SparseMatrixCSR& A, const TrialFunction& v,
                             const TestFunction& w) {
  if (static_cast<int>(v.coeffs.size()) != A.n_cols ||
      static_cast<int>(w.coeffs.size()) != A.n_rows)
    throw std::invalid_argument("apply_bilinear: dimension mismatch");
  std::vector<double> Av = A.multiply(v.coeffs);
  double s = 0.0;
  for (int i = 0; i < A.n_rows; ++i) s += w.coeffs[i] * Av[i];
  return s;
}

}  // namespace fvr
