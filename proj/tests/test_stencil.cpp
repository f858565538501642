#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "apmm/analysis.hpp"
#include "apmm/stencil.hpp"

using namespace apmm;

namespace {

// refinement-slope oracle on smooth periodic samples
double refinement_slope(const std::function<StencilMatrix<double>(Index, double)>& make) {
  std::vector<double> errs, hs;
  for (Index n : {32, 64, 128}) {
    const double dx = 2 * EIGEN_PI / static_cast<double>(n);
    VectorXd f(n), df(n);
    for (Index i = 0; i < n; ++i) {
      f[i] = std::sin(i * dx);
      df[i] = std::cos(i * dx);
    }
    errs.push_back((make(n, dx).apply(f) - df).cwiseAbs().maxCoeff());
    hs.push_back(dx);
  }
  return observed_order(errs, hs).slope;
}

}  // namespace

TEST_CASE("circ places the marked entry on the diagonal and wraps") {
  auto s = StencilMatrix<double>::circulant({-1.0, 1.0}, 1, 3);
  VectorXd g(3);
  g << 7.0, 11.0, 13.0;
  VectorXd out = s.apply(g);
  CHECK(out[0] == g[0] - g[2]);
  CHECK(out[1] == g[1] - g[0]);
  CHECK(out[2] == g[2] - g[1]);

  auto id = StencilMatrix<double>::circulant({1.0}, 0, 5);
  CHECK(id.dense().isApprox(MatrixXd::Identity(5, 5)));
}

TEST_CASE("first-derivative stencils annihilate constants") {
  for (int order : {1, 3}) {
    auto [gm, gp] = upwind_pair<double>(order, 16, 0.1);
    VectorXd ones = VectorXd::Ones(16);
    CHECK(gm.apply(ones).cwiseAbs().maxCoeff() < 1e-14);
    CHECK(gp.apply(ones).cwiseAbs().maxCoeff() < 1e-14);
  }
  CHECK(central_colocated<double>(4, 16, 0.1).apply(VectorXd(VectorXd::Ones(16))).cwiseAbs().maxCoeff() <
        1e-13);
  CHECK(average_to_g<double>(16).apply(VectorXd(VectorXd::Ones(16))).cwiseAbs().maxCoeff() ==
        Catch::Approx(1.0));  // averaging preserves constants
}

TEST_CASE("refinement slopes match the nominal orders") {
  CHECK(refinement_slope([](Index n, double dx) { return upwind_pair<double>(1, n, dx).first; }) ==
        Catch::Approx(1.0).margin(0.2));
  CHECK(refinement_slope([](Index n, double dx) { return central_colocated<double>(2, n, dx); }) ==
        Catch::Approx(2.0).margin(0.2));
  CHECK(refinement_slope([](Index n, double dx) { return upwind_pair<double>(3, n, dx).first; }) ==
        Catch::Approx(3.0).margin(0.2));
  CHECK(refinement_slope([](Index n, double dx) { return upwind_pair<double>(3, n, dx).second; }) ==
        Catch::Approx(3.0).margin(0.2));
  CHECK(refinement_slope([](Index n, double dx) { return central_colocated<double>(4, n, dx); }) ==
        Catch::Approx(4.0).margin(0.2));
}

TEST_CASE("upwind pairs are reflections of each other") {
  for (int order : {1, 3}) {
    const Index n = 12;
    auto [gm, gp] = upwind_pair<double>(order, n, 0.25);
    MatrixXd rev = MatrixXd::Zero(n, n);
    for (Index i = 0; i < n; ++i) rev(i, n - 1 - i) = 1.0;
    CHECK((gp.dense() + rev * gm.dense() * rev).cwiseAbs().maxCoeff() < 1e-14);
  }
}

TEST_CASE("staggered gradient/divergence compose to the 3-point Laplacian") {
  const Index n = 10;
  const double dx = 0.3;
  MatrixXd lap = central_div_to_rho<double>(n, dx).dense() * central_grad_to_g<double>(n, dx).dense();
  MatrixXd expected = StencilMatrix<double>::circulant({1.0, -2.0, 1.0}, 1, n, 1.0 / (dx * dx)).dense();
  CHECK((lap - expected).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((lap * VectorXd::Ones(n)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("boundary operators have the stated shapes and rows") {
  const Index nx = 8;
  const double dx = 0.5;
  auto b = boundary_operators<double>(nx, dx);
  CHECK(b.upwind_minus.rows() == nx - 1);
  CHECK(b.upwind_minus.cols() == nx + 1);
  CHECK(b.upwind_plus.rows() == nx - 1);
  CHECK(b.upwind_plus.cols() == nx + 1);
  CHECK(b.div_to_rho.rows() == nx - 2);
  CHECK(b.div_to_rho.cols() == nx - 1);
  CHECK(b.avg_to_rho.rows() == nx - 2);
  CHECK(b.avg_to_rho.cols() == nx - 1);
  CHECK(b.grad_to_g.rows() == nx - 1);
  CHECK(b.grad_to_g.cols() == nx - 2);

  // B_avg maps constants to constants
  CHECK((b.avg_to_rho.apply(VectorXd(VectorXd::Ones(nx - 1))) - VectorXd::Ones(nx - 2))
            .cwiseAbs()
            .maxCoeff() < 1e-15);

  // truncated first/last rows of the bounded gradient
  MatrixXd g = b.grad_to_g.dense();
  CHECK(g(0, 0) == 1.0 / dx);
  CHECK(g.row(0).tail(nx - 3).cwiseAbs().maxCoeff() == 0.0);
  CHECK(g(nx - 2, nx - 3) == -1.0 / dx);
  CHECK(g.row(nx - 2).head(nx - 3).cwiseAbs().maxCoeff() == 0.0);

  // backward difference is exact on linear ramps over the closed grid
  VectorXd ramp(nx + 1);
  for (Index i = 0; i < nx + 1; ++i) ramp[i] = 3.0 * (i - 0.5) * dx + 1.0;
  VectorXd slope = b.upwind_minus.apply(ramp);
  CHECK((slope.array() - 3.0).abs().maxCoeff() < 1e-13);
}

TEST_CASE("boundary source vector completes the closed-grid difference") {
  const Index nx = 8;
  const double dx = 0.5;
  auto b = boundary_operators<double>(nx, dx);
  // linear closed profile rho(x) = 2x + 1 on nodes x_i = i dx
  auto rho_fn = [&](Index i) { return 2.0 * i * dx + 1.0; };
  VectorXd interior(nx - 2);
  for (Index i = 1; i <= nx - 2; ++i) interior[i - 1] = rho_fn(i);
  VectorXd bd = boundary_rho_vector(rho_fn(0), rho_fn(nx - 1), dx, nx);
  CHECK(bd[0] == -rho_fn(0) / dx);
  CHECK(bd[nx - 2] == rho_fn(nx - 1) / dx);
  VectorXd grad = b.grad_to_g.apply(interior);
  grad += bd;
  CHECK((grad.array() - 2.0).abs().maxCoeff() < 1e-13);

  CHECK(boundary_rho_vector(0.0, 0.0, dx, nx).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("misuse is rejected") {
  CHECK_THROWS_AS(StencilMatrix<double>::circulant({1.0, 2.0}, 5, 8), std::invalid_argument);
  CHECK_THROWS_AS(StencilMatrix<double>::circulant({1.0, 2.0, 3.0}, 1, 2), std::invalid_argument);
  CHECK_THROWS_AS(upwind_pair<double>(2, 8, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(central_colocated<double>(3, 8, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(boundary_operators<double>(3, 0.1), std::invalid_argument);
}
