#pragma once

// Legendre polynomials, Gauss and Lobatto point sets, and barycentric
// Lagrange bases on arbitrary 1D node sets.

#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace fvr {

inline constexpr int kMaxRuleOrder = 64;

/// L_r(x) and L'_r(x) by the three-term recurrence; derivative by
/// L'_k = L'_{k-2} + (2k-1) L_{k-1}, exact at the endpoints.
inline std::pair<double, double> legendre_eval(int r, double x) {
  if (r < 0) throw std::invalid_argument("legendre_eval: negative degree");
  if (std::abs(x) > 1.0 + 1e-12) throw std::invalid_argument("legendre_eval: |x| > 1");
  double pm1 = 1.0, dpm1 = 0.0;  // L_0
  if (r == 0) return {pm1, dpm1};
  double p = x, dp = 1.0;  // L_1
  for (int k = 2; k <= r; ++k) {
    double pk = ((2 * k - 1) * x * p - (k - 1) * pm1) / k;
    double dpk = dpm1 + (2 * k - 1) * p;
    pm1 = p;
    dpm1 = dp;
    p = pk;
    dp = dpk;
  }
  return {p, dp};
}

// L'_r and L''_r, used by the Lobatto Newton iteration.
inline std::pair<double, double> legendre_deriv12(int r, double x) {
  double pm1 = 1.0, dpm1 = 0.0, d2pm1 = 0.0;
  double p = x, dp = 1.0, d2p = 0.0;
  for (int k = 2; k <= r; ++k) {
    double pk = ((2 * k - 1) * x * p - (k - 1) * pm1) / k;
    double dpk = dpm1 + (2 * k - 1) * p;
    double d2pk = d2pm1 + (2 * k - 1) * dp;
    pm1 = p;
    dpm1 = dp;
    d2pm1 = d2p;
    p = pk;
    dp = dpk;
    d2p = d2pk;
  }
  return {dp, d2p};
}

struct QuadratureRule {
  std::vector<double> nodes;    // strictly increasing, in (-1,1)
  std::vector<double> weights;  // positive, summing to 2
  int order = 0;
};

enum class NodeKind { Gauss, Lobatto };

struct NodeSet1D {
  std::vector<double> nodes;
  NodeKind kind = NodeKind::Gauss;
};

/// r-point Gauss rule on [-1,1]: Newton from Chebyshev initial guesses,
/// weights A_j = 2 / ((1 - G_j^2) L'_r(G_j)^2).
inline QuadratureRule gauss_rule(int r) {
  if (r < 1 || r > kMaxRuleOrder)
    throw std::invalid_argument("gauss_rule: order must be in [1," +
                                std::to_string(kMaxRuleOrder) + "]");
  QuadratureRule rule;
  rule.order = r;
  rule.nodes.resize(r);
  rule.weights.resize(r);
  for (int i = 0; i < r; ++i) {
    double x = -std::cos(M_PI * (4.0 * i + 3.0) / (4.0 * r + 2.0));
    bool converged = false;
    for (int it = 0; it < 100; ++it) {
      auto [p, dp] = legendre_eval(r, x);
      double step = p / dp;
      x -= step;
      if (std::abs(step) < 1e-14) {
        converged = true;
        break;
      }
    }
    if (!converged) throw std::runtime_error("gauss_rule: Newton iteration did not converge");
    auto [p, dp] = legendre_eval(r, x);
    (void)p;
    rule.nodes[i] = x;
    rule.weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  // Enforce exact symmetry about 0.
  for (int i = 0; i < r / 2; ++i) {
    double n = 0.5 * (rule.nodes[r - 1 - i] - rule.nodes[i]);
    double w = 0.5 * (rule.weights[i] + rule.weights[r - 1 - i]);
    rule.nodes[i] = -n;
    rule.nodes[r - 1 - i] = n;
    rule.weights[i] = rule.weights[r - 1 - i] = w;
  }
  if (r % 2 == 1) rule.nodes[r / 2] = 0.0;
  return rule;
}

/// Lobatto points of degree r: {-1} U {zeros of L'_r} U {+1}, size r+1.
inline NodeSet1D lobatto_points(int r) {
  if (r < 1 || r > kMaxRuleOrder)
    throw std::invalid_argument("lobatto_points: order must be in [1," +
                                std::to_string(kMaxRuleOrder) + "]");
  NodeSet1D set;
  set.kind = NodeKind::Lobatto;
  set.nodes.push_back(-1.0);
  if (r >= 2) {
    // Zeros of L'_r interlace the Gauss nodes of degree r (Rolle), so the
    // midpoints of consecutive Gauss nodes are safe starting points.
    QuadratureRule g = gauss_rule(r);
    for (int i = 0; i + 1 < r; ++i) {
      double x = 0.5 * (g.nodes[i] + g.nodes[i + 1]);
      bool converged = false;
      for (int it = 0; it < 100; ++it) {
        auto [dp, d2p] = legendre_deriv12(r, x);
        double step = dp / d2p;
        x -= step;
        if (std::abs(step) < 1e-14) {
          converged = true;
          break;
        }
      }
      if (!converged)
        throw std::runtime_error("lobatto_points: Newton iteration did not converge");
      set.nodes.push_back(x);
    }
    for (int i = 1; i <= (r - 1) / 2; ++i) {
      double v = 0.5 * (set.nodes[r - i] - set.nodes[i]);
      set.nodes[i] = -v;
      set.nodes[r - i] = v;
    }
    if (r % 2 == 0) set.nodes[r / 2] = 0.0;
  }
  set.nodes.push_back(1.0);
  return set;
}

/// Barycentric Lagrange basis on a fixed set of distinct nodes.
class BarycentricBasis {
 public:
  BarycentricBasis() = default;

  explicit BarycentricBasis(std::vector<double> nodes) : nodes_(std::move(nodes)) {
    const std::size_t n = nodes_.size();
    if (n == 0) throw std::invalid_argument("BarycentricBasis: empty node set");
    w_.assign(n, 1.0);
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t k = 0; k < n; ++k) {
        if (k == j) continue;
        double d = nodes_[j] - nodes_[k];
        if (d == 0.0) throw std::invalid_argument("BarycentricBasis: duplicate nodes");
        w_[j] /= d;
      }
    }
    // Scale out the common magnitude; only weight ratios enter the formulas.
    double wmax = 0.0;
    for (double w : w_) wmax = std::max(wmax, std::abs(w));
    for (double& w : w_) w /= wmax;
  }

  std::size_t size() const { return nodes_.size(); }
  const std::vector<double>& nodes() const { return nodes_; }

  /// values[j] = l_j(x), derivs[j] = l'_j(x); both spans sized size().
  void eval(double x, std::span<double> values, std::span<double> derivs) const {
    const std::size_t n = nodes_.size();
    double scale = 0.0;
    for (std::size_t j = 0; j < n; ++j) scale = std::max(scale, std::abs(nodes_[j]));
    const double snap = 1e-14 * std::max(scale, 1.0);
    std::size_t hit = n;
    for (std::size_t j = 0; j < n; ++j)
      if (std::abs(x - nodes_[j]) <= snap) {
        hit = j;
        break;
      }
    if (hit < n) {
      // l'_j(x_i) = (w_j / w_i) / (x_i - x_j); the diagonal balances the row.
      double diag = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        values[j] = (j == hit) ? 1.0 : 0.0;
        if (j != hit) {
          derivs[j] = (w_[j] / w_[hit]) / (nodes_[hit] - nodes_[j]);
          diag -= derivs[j];
        }
      }
      derivs[hit] = diag;
      return;
    }
    double s = 0.0, sp = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      double t = w_[j] / (x - nodes_[j]);
      values[j] = t;  // temporary: t_j
      s += t;
      sp += t / (x - nodes_[j]);
    }
    for (std::size_t j = 0; j < n; ++j) {
      double l = values[j] / s;
      values[j] = l;
      derivs[j] = l * (sp / s - 1.0 / (x - nodes_[j]));
    }
  }

  void eval_values(double x, std::span<double> values) const {
    std::vector<double> d(nodes_.size());
    eval(x, values, d);
  }

 private:
  std::vector<double> nodes_;
  std::vector<double> w_;
};

/// One-shot barycentric evaluation matching the 1D basis contract.
inline std::pair<std::vector<double>, std::vector<double>> lagrange_eval_1d(
    const NodeSet1D& nodes, double x) {
  BarycentricBasis basis(nodes.nodes);
  std::vector<double> v(basis.size()), d(basis.size());
  basis.eval(x, v, d);
  return {std::move(v), std::move(d)};
}

}  // namespace fvr
