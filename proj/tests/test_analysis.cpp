#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "apmm/analysis.hpp"
#include "apmm/micromacro.hpp"

using namespace apmm;

TEST_CASE("error norms") {
  VectorXd a = VectorXd::LinSpaced(8, 0.0, 1.0);
  CHECK(error(a, a, ErrorNorm::l2, 0.1) == 0.0);
  CHECK(error(a, a, ErrorNorm::linf) == 0.0);
  VectorXd b = a.array() + 0.25;
  CHECK(error(a, b, ErrorNorm::linf) == Catch::Approx(0.25));
  CHECK_THROWS_AS(error(a, VectorXd(VectorXd::Zero(5)), ErrorNorm::l2, 0.1), std::invalid_argument);

  // discrete L2 of sin on [0, 2pi] is exactly sqrt(pi): sum sin^2 = n/2
  const Index n = 64;
  const double dx = 2 * EIGEN_PI / n;
  VectorXd s(n);
  for (Index i = 0; i < n; ++i) s[i] = std::sin(i * dx);
  CHECK(error(s, VectorXd(VectorXd::Zero(n)), ErrorNorm::l2, dx) ==
        Catch::Approx(std::sqrt(EIGEN_PI)).epsilon(1e-13));
}

TEST_CASE("observed_order recovers exact power laws and trims saturated ends") {
  std::vector<double> steps = {0.1, 0.05, 0.025, 0.0125};
  std::vector<double> quad, cubic;
  for (double h : steps) {
    quad.push_back(3.0 * h * h);
    cubic.push_back(0.7 * h * h * h);
  }
  CHECK(observed_order(quad, steps).slope == Catch::Approx(2.0).margin(1e-12));
  CHECK(observed_order(cubic, steps).slope == Catch::Approx(3.0).margin(1e-12));

  // saturated finest point gets excluded from the fit window
  std::vector<double> sat = {3e-3, 3.75e-4, 4.7e-5, 2e-5};
  auto fit = observed_order(sat, steps);
  CHECK(fit.last_used == 2);
  CHECK(fit.slope == Catch::Approx(3.0).margin(0.05));

  // pre-asymptotic coarsest point likewise
  std::vector<double> pre = {4e-3, 3.75e-4, 4.69e-5, 5.86e-6};
  auto fit2 = observed_order(pre, steps);
  CHECK(fit2.first_used == 1);
  CHECK(fit2.slope == Catch::Approx(3.0).margin(0.05));

  const std::vector<double> two_steps = {0.1, 0.05}, two_errs = {1.0, 0.5};
  CHECK_THROWS_AS(observed_order(two_errs, two_steps), std::invalid_argument);
  const std::vector<double> bad_errs = {1.0, 0.0, 0.1}, three_steps = {0.1, 0.05, 0.025};
  CHECK_THROWS_AS(observed_order(bad_errs, three_steps), std::invalid_argument);
}

TEST_CASE("ap_residual vanishes on exactly prepared micro parts") {
  VelocityGridd grid(5.0, 10);
  auto op = CollisionOperator<double>::bgk(grid);
  const Index n = 16;
  auto grad = central_colocated<double>(2, n, 0.1);
  VectorXd rho = VectorXd::LinSpaced(n, 0.0, 1.0).array().sin().matrix();
  VectorXd vM = grid.points().cwiseProduct(grid.equilibrium());
  const double eps = 1e-3;
  MatrixXd g = (eps * grad.apply(rho)) * op.pseudo_inverse(vM).transpose();
  CHECK(ap_residual(g, rho, eps, op, grad) < 1e-16);
  g.array() += 1e-5;
  CHECK(ap_residual(g, rho, eps, op, grad) == Catch::Approx(1e-5).epsilon(1e-6));
}

namespace {

struct PiFixture {
  VelocityGridd grid{3.0, 6};
  CollisionOperator<double> op = CollisionOperator<double>::bgk(grid);
  std::mt19937 rng{1234};

  PiTensorEvaluator<double> make(const std::string& scheme, Index n_x = 8, Index start = 0) {
    auto tab = builtin_tableau<double>(scheme);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<VectorXd> r1(tab.stages), r2(tab.stages);
    for (Index k = 0; k < tab.stages; ++k) {
      r1[k] = VectorXd::NullaryExpr(n_x, [&](Index) { return u(rng); });
      r2[k] = VectorXd::NullaryExpr(n_x, [&](Index) { return u(rng); });
    }
    return PiTensorEvaluator<double>(tab, grid, op, r1, r2, start);
  }
};

}  // namespace

TEST_CASE_METHOD(PiFixture, "depth-one tensors reduce to the weighted R bracket") {
  auto pi = make("DP1_A242");
  // m=1, k1=j: the S-chain is trivial
  auto tab = builtin_tableau<double>("DP1_A242");
  for (Index j = 1; j <= tab.stages; ++j) {
    VectorXd direct = pi.eval(j, j, 1);
    CHECK(direct.size() == 8);
  }
  // <v L^{-1}(vM)> = -kappa
  CHECK(pi.v_linv_vm() == Catch::Approx(-op.kappa()).epsilon(1e-13));
}

TEST_CASE_METHOD(PiFixture, "recurrence and vanishing identities over random draws") {
  for (const std::string scheme : {"DP_A121", "DP2_A242", "DP1_A242"}) {
    for (int draw = 0; draw < 100; ++draw) {
      auto pi = make(scheme);
      auto tab = builtin_tableau<double>(scheme);
      for (Index j = 2; j <= tab.stages; ++j) {
        for (Index m = 2; m <= j; ++m) {
          VectorXd lhs = pi.eval(j, j, m);
          VectorXd rhs = VectorXd::Zero(8);
          for (Index k1 = 1; k1 < j; ++k1) rhs += pi.eval(j, k1, m - 1);
          REQUIRE((lhs - rhs).lpNorm<Eigen::Infinity>() <= 1e-13);
        }
        for (Index k1 = 1; k1 < j; ++k1)
          REQUIRE(pi.eval(j, k1, j).lpNorm<Eigen::Infinity>() <= 1e-13);
      }
    }
  }
}

TEST_CASE_METHOD(PiFixture, "alternating sums equal the closed-form limit") {
  for (const std::string scheme : {"DP_A121", "DP2_A242", "DP1_A242"}) {
    for (int draw = 0; draw < 100; ++draw) {
      auto pi = make(scheme);
      REQUIRE(limit_scheme_check(pi) <= 1e-12);
    }
  }
  // CK-ARS with the index shift
  auto pi = make("ARS222", 8, 1);
  CHECK(limit_scheme_check(pi) <= 1e-12);
}

TEST_CASE("single-stage tableau reduces both limit routes to the same backward Euler form") {
  VelocityGridd grid(3.0, 6);
  auto op = CollisionOperator<double>::bgk(grid);
  DoubleButcherTableau<double> t;
  t.name = "be";
  t.stages = 1;
  t.a_explicit = MatrixXd::Zero(1, 1);
  t.a_implicit = MatrixXd::Constant(1, 1, 0.8);
  t.b_explicit = VectorXd::Zero(1);
  t.b_implicit = VectorXd::Constant(1, 0.8);
  t.c_explicit = VectorXd::Zero(1);
  t.c_implicit = VectorXd::Constant(1, 0.8);
  std::vector<VectorXd> r1 = {VectorXd::LinSpaced(6, -1.0, 1.0)};
  std::vector<VectorXd> r2 = {VectorXd::LinSpaced(6, 2.0, 3.0)};
  PiTensorEvaluator<double> pi(t, grid, op, r1, r2);
  CHECK(limit_scheme_check(pi) < 1e-15);
  CHECK((pi.alternating_sum(1) - 0.8 * op.kappa() * r1[0]).lpNorm<Eigen::Infinity>() < 1e-14);
}

TEST_CASE("zero diagonal inside the active range is rejected") {
  VelocityGridd grid(3.0, 6);
  auto op = CollisionOperator<double>::bgk(grid);
  auto tab = builtin_tableau<double>("ARS222");  // a_11 = 0
  std::vector<VectorXd> r1(tab.stages, VectorXd::Ones(4)), r2(tab.stages, VectorXd::Ones(4));
  CHECK_THROWS_AS(PiTensorEvaluator<double>(tab, grid, op, r1, r2, 0), std::invalid_argument);
  CHECK_NOTHROW(PiTensorEvaluator<double>(tab, grid, op, r1, r2, 1));
}
