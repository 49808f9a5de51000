#pragma once

// Primal tensor-product partition of a rectangle and the Gauss-point dual
// partition.  Per axis, the dual structure is a flat list of "strips": the
// m*r+1 intervals delimited by {a} U {all Gauss abscissae} U {b}.  Strips 0
// and m*r touch the boundary; interior strips 1..m*r-1 index test-space
// degrees of freedom.  The Gauss line s (s = 1..m*r) separates strips s-1
// and s.

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fvr/quadrature.hpp"

namespace fvr {

/// Element index owning coordinate t, ties at an interior breakpoint resolved
/// to the lower element; t == breaks.front() maps to element 0.
inline int locate_element(const std::vector<double>& breaks, double t) {
  const double tol = 1e-12 * std::max(1.0, std::abs(breaks.back() - breaks.front()));
  if (t < breaks.front() - tol || t > breaks.back() + tol)
    throw std::invalid_argument("locate_element: coordinate outside domain");
  auto it = std::lower_bound(breaks.begin(), breaks.end(), t);
  int idx = static_cast<int>(it - breaks.begin());
  int e = idx - 1;
  e = std::clamp(e, 0, static_cast<int>(breaks.size()) - 2);
  return e;
}

struct PrimalMesh {
  std::vector<double> xb, yb;  // breakpoints, strictly increasing
  double h = 0.0;              // max element width over both axes

  PrimalMesh(std::vector<double> xs, std::vector<double> ys)
      : xb(std::move(xs)), yb(std::move(ys)) {
    validate_axis(xb, "x");
    validate_axis(yb, "y");
    h = 0.0;
    for (std::size_t i = 0; i + 1 < xb.size(); ++i) h = std::max(h, xb[i + 1] - xb[i]);
    for (std::size_t j = 0; j + 1 < yb.size(); ++j) h = std::max(h, yb[j + 1] - yb[j]);
  }

  static PrimalMesh uniform(double a, double b, double c, double d, int m, int n) {
    if (m < 1 || n < 1) throw std::invalid_argument("PrimalMesh::uniform: m,n must be >= 1");
    std::vector<double> xs(m + 1), ys(n + 1);
    for (int i = 0; i <= m; ++i) xs[i] = a + (b - a) * i / m;
    for (int j = 0; j <= n; ++j) ys[j] = c + (d - c) * j / n;
    return PrimalMesh(std::move(xs), std::move(ys));
  }

  int m() const { return static_cast<int>(xb.size()) - 1; }
  int n() const { return static_cast<int>(yb.size()) - 1; }
  double hx(int i) const { return xb[i + 1] - xb[i]; }  // 0-based element
  double hy(int j) const { return yb[j + 1] - yb[j]; }
  double area() const { return (xb.back() - xb.front()) * (yb.back() - yb.front()); }

 private:
  static void validate_axis(const std::vector<double>& b, const char* name) {
    if (b.size() < 2)
      throw std::invalid_argument(std::string("PrimalMesh: need at least 2 ") + name +
                                  "-breakpoints");
    for (std::size_t i = 0; i + 1 < b.size(); ++i)
      if (!(b[i] < b[i + 1]))
        throw std::invalid_argument(std::string("PrimalMesh: ") + name +
                                    "-breakpoints not strictly increasing");
  }
};

inline PrimalMesh build_primal(std::vector<double> xs, std::vector<double> ys) {
  return PrimalMesh(std::move(xs), std::move(ys));
}

struct AxisDual {
  int r = 0;
  int elems = 0;
  std::vector<double> breaks;   // the axis' primal breakpoints
  std::vector<double> gauss;    // global Gauss abscissae, size elems*r
  std::vector<double> weights;  // scaled Gauss weights per abscissa (A^x_{i,k})
  std::vector<double> edges;    // {a} U gauss U {b}, size elems*r+2

  int lines() const { return elems * r; }
  int strips() const { return elems * r + 1; }
  int interior() const { return elems * r - 1; }

  /// Flat strip index of the (element, local-gauss) pair (i,k), both 1-based.
  int strip_of(int i, int k) const {
    if (i < 1 || i > elems || k < 1 || k > r)
      throw std::invalid_argument("strip_of: index out of range");
    return (i - 1) * r + k;
  }

  /// Inverse of strip_of; nullopt marks the lower boundary strip s = 0.
  std::optional<std::pair<int, int>> strip_inverse(int s) const {
    if (s < 0 || s > lines()) throw std::invalid_argument("strip_inverse: index out of range");
    if (s == 0) return std::nullopt;
    return std::make_pair((s - 1) / r + 1, (s - 1) % r + 1);
  }

  /// 0-based element containing Gauss line s (s in 1..elems*r).
  int line_element(int s) const {
    if (s < 1 || s > lines()) throw std::invalid_argument("line_element: index out of range");
    return (s - 1) / r;
  }

  struct Piece {
    double lo, hi;
    int elem;  // 0-based primal element containing [lo,hi]
  };

  /// Strip s split at primal breakpoints; each piece lies in one element.
  std::vector<Piece> strip_pieces(int s) const {
    if (s < 0 || s >= strips()) throw std::invalid_argument("strip_pieces: index out of range");
    double lo = edges[s], hi = edges[s + 1];
    std::vector<Piece> pieces;
    double cur = lo;
    for (std::size_t b = 1; b + 1 < breaks.size(); ++b) {
      if (breaks[b] > lo && breaks[b] < hi) {
        pieces.push_back({cur, breaks[b], locate_element(breaks, 0.5 * (cur + breaks[b]))});
        cur = breaks[b];
      }
    }
    pieces.push_back({cur, hi, locate_element(breaks, 0.5 * (cur + hi))});
    return pieces;
  }

  std::vector<double> breaks_inside(int s) const {
    double lo = edges[s], hi = edges[s + 1];
    std::vector<double> out;
    for (std::size_t b = 1; b + 1 < breaks.size(); ++b)
      if (breaks[b] > lo && breaks[b] < hi) out.push_back(breaks[b]);
    return out;
  }
};

namespace detail {

inline AxisDual build_axis_dual(const std::vector<double>& breaks, int r) {
  AxisDual d;
  d.r = r;
  d.elems = static_cast<int>(breaks.size()) - 1;
  d.breaks = breaks;
  QuadratureRule g = gauss_rule(r);
  d.gauss.reserve(d.elems * r);
  d.weights.reserve(d.elems * r);
  for (int i = 0; i < d.elems; ++i) {
    double lo = breaks[i], hi = breaks[i + 1], h = hi - lo;
    for (int k = 0; k < r; ++k) {
      d.gauss.push_back(0.5 * (lo + hi + h * g.nodes[k]));
      d.weights.push_back(0.5 * h * g.weights[k]);
    }
  }
  d.edges.reserve(d.gauss.size() + 2);
  d.edges.push_back(breaks.front());
  d.edges.insert(d.edges.end(), d.gauss.begin(), d.gauss.end());
  d.edges.push_back(breaks.back());
  return d;
}

}  // namespace detail

struct DualMesh {
  AxisDual x, y;
  int r = 0;

  int n_interior() const { return x.interior() * y.interior(); }

  /// Row index of the interior control volume (sx, sy), both 1-based strips.
  int row_index(int sx, int sy) const {
    return (sy - 1) * x.interior() + (sx - 1);
  }

  struct Rect {
    double x0, x1, y0, y1;
    int ex, ey;  // 0-based primal element containing the rectangle
  };

  /// The control volume (sx, sy) split at primal breakpoints: 1, 2 or 4
  /// rectangles, each inside a single primal element.
  std::vector<Rect> control_volume_pieces(int sx, int sy) const {
    std::vector<Rect> out;
    for (const auto& px : x.strip_pieces(sx))
      for (const auto& py : y.strip_pieces(sy))
        out.push_back({px.lo, px.hi, py.lo, py.hi, px.elem, py.elem});
    return out;
  }
};

inline DualMesh build_dual(const PrimalMesh& primal, int r) {
  if (r < 1) throw std::invalid_argument("build_dual: order must be >= 1");
  DualMesh d;
  d.r = r;
  d.x = detail::build_axis_dual(primal.xb, r);
  d.y = detail::build_axis_dual(primal.yb, r);
  return d;
}

}  // namespace fvr
