#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "fvr/space.hpp"

using namespace fvr;

TEST_CASE("dimension counts") {
  for (int m : {1, 2, 3})
    for (int n : {1, 2, 4})
      for (int r : {1, 2, 3}) {
        TrialSpace sp(PrimalMesh::uniform(0, 1, 0, 1, m, n), r);
        CHECK(sp.ndof() == (m * r - 1) * (n * r - 1));
      }
  // r=1 on a single element: the space is trivial.
  TrialSpace trivial(PrimalMesh::uniform(0, 1, 0, 1, 1, 1), 1);
  CHECK(trivial.ndof() == 0);
}

TEST_CASE("zero coefficients evaluate to zero everywhere") {
  TrialSpace sp(PrimalMesh::uniform(0, 1, 0, 1, 2, 2), 2);
  TrialFunction v(sp);
  for (double x : {0.0, 0.3, 0.5, 1.0})
    for (double y : {0.0, 0.7, 1.0}) CHECK(v.eval(x, y) == 0.0);
}

TEST_CASE("nodal basis property") {
  TrialSpace sp(PrimalMesh::uniform(0, 1, 0, 1, 2, 2), 3);
  TrialFunction v(sp);
  int ix = 2, iy = 4;
  v.coeffs[sp.dof_index(ix, iy)] = 1.0;
  for (int jx = 0; jx < static_cast<int>(sp.nodes_x.size()); ++jx)
    for (int jy = 0; jy < static_cast<int>(sp.nodes_y.size()); ++jy) {
      double want = (jx == ix && jy == iy) ? 1.0 : 0.0;
      CHECK(v.eval(sp.nodes_x[jx], sp.nodes_y[jy]) == Catch::Approx(want).margin(1e-12));
    }
}

TEST_CASE("interpolation examples") {
  TrialSpace sp(PrimalMesh::uniform(0, 1, 0, 1, 2, 2), 2);
  TrialFunction z = interpolate(sp, [](double, double) { return 0.0; });
  for (double c : z.coeffs) CHECK(c == 0.0);

  TrialFunction s =
      interpolate(sp, [](double x, double y) { return std::sin(M_PI * x) * std::sin(M_PI * y); });
  // Center node (0.5, 0.5) carries the value 1.
  CHECK(s.coeffs[sp.dof_index(2, 2)] == Catch::Approx(1.0).margin(1e-15));
}

TEST_CASE("Q_r reproduction on a graded mesh") {
  // Random bi-polynomial of degree r vanishing on the boundary: bubble times
  // a random polynomial of degree r-2 per axis.  Direct monomial evaluation
  // is the independent reference.
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  PrimalMesh mesh = build_primal({0, 0.3, 0.55, 1.0}, {0, 0.45, 1.0});
  for (int r : {2, 3, 4}) {
    TrialSpace sp(mesh, r);
    std::vector<double> cx(r - 1), cy(r - 1);
    for (auto& c : cx) c = uni(rng);
    for (auto& c : cy) c = uni(rng);
    auto g = [&](double x, double y) {
      double px = 0.0, py = 0.0;
      for (int i = 0; i < r - 1; ++i) px += cx[i] * std::pow(x, i);
      for (int i = 0; i < r - 1; ++i) py += cy[i] * std::pow(y, i);
      return x * (1 - x) * y * (1 - y) * px * py;
    };
    TrialFunction v = interpolate(sp, g);
    std::uniform_real_distribution<double> pt(0.0, 1.0);
    for (int t = 0; t < 100; ++t) {
      double x = pt(rng), y = pt(rng);
      CHECK(v.eval(x, y) == Catch::Approx(g(x, y)).margin(1e-11));
    }
  }
}

TEST_CASE("gradient matches central finite differences") {
  TrialSpace sp(PrimalMesh::uniform(0, 1, 0, 1, 3, 3), 3);
  std::mt19937 rng(8);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  TrialFunction v(sp);
  for (double& c : v.coeffs) c = uni(rng);
  std::uniform_real_distribution<double> pt(0.05, 0.28);  // interior of the first element
  for (int t = 0; t < 20; ++t) {
    double x = pt(rng), y = pt(rng);
    auto [gx, gy] = v.eval_grad(x, y);
    const double hs = 1e-6;
    double fdx = (v.eval(x + hs, y) - v.eval(x - hs, y)) / (2 * hs);
    double fdy = (v.eval(x, y + hs) - v.eval(x, y - hs)) / (2 * hs);
    CHECK(gx == Catch::Approx(fdx).epsilon(1e-5).margin(1e-5));
    CHECK(gy == Catch::Approx(fdy).epsilon(1e-5).margin(1e-5));
  }
}

TEST_CASE("second derivatives match the analytic bubble") {
  TrialSpace sp(PrimalMesh::uniform(0, 1, 0, 1, 2, 2), 2);
  auto g = [](double x, double y) { return x * (1 - x) * y * (1 - y); };
  TrialFunction v = interpolate(sp, g);
  double x = 0.3, y = 0.65;
  auto d2 = v.eval_second(x, y);
  CHECK(d2.dxx == Catch::Approx(-2 * y * (1 - y)).margin(1e-11));
  CHECK(d2.dyy == Catch::Approx(-2 * x * (1 - x)).margin(1e-11));
  CHECK(d2.dxy == Catch::Approx((1 - 2 * x) * (1 - 2 * y)).margin(1e-11));
  CHECK(v.eval_mixed(x, y) == Catch::Approx((1 - 2 * x) * (1 - 2 * y)).margin(1e-11));
}

TEST_CASE("points outside the domain are rejected") {
  TrialSpace sp(PrimalMesh::uniform(0, 1, 0, 1, 2, 2), 2);
  TrialFunction v(sp);
  CHECK_THROWS_AS(v.eval(1.5, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(v.eval(0.5, -0.2), std::invalid_argument);
  CHECK_NOTHROW(v.eval(1.0 + 1e-13, 0.5));  // within the boundary tolerance
}
