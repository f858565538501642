#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "apmm/collision.hpp"

using namespace apmm;

namespace {

VectorXd random_vector(Index n, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  return VectorXd::NullaryExpr(n, [&](Index) { return u(rng); });
}

// admissible custom operator: self-adjoint in the M^{-1} weighted product,
// non-positive, null space exactly span(M). Built in the symmetrized frame
// u = h / sqrt(M) where those properties are plain matrix statements.
MatrixXd random_admissible_matrix(const VelocityGridd& grid, unsigned seed) {
  const Index n = grid.size();
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(0.2, 2.0);
  VectorXd sqrtM = grid.equilibrium().cwiseSqrt();
  MatrixXd proj = MatrixXd::Identity(n, n) - sqrtM * sqrtM.transpose() / sqrtM.squaredNorm();
  MatrixXd d = MatrixXd::Zero(n, n);
  for (Index k = 0; k < n; ++k) d(k, k) = u(rng);
  MatrixXd sym = -proj * d * proj;
  return MatrixXd(sqrtM.asDiagonal()) * sym * MatrixXd(sqrtM.cwiseInverse().asDiagonal());
}

}  // namespace

TEST_CASE("BGK operator annihilates M and acts as -I on the zero-mean part") {
  VelocityGridd grid(5.0, 10);
  auto op = CollisionOperator<double>::bgk(grid);
  CHECK(op.apply(grid.equilibrium()).cwiseAbs().maxCoeff() < 1e-15);
  VectorXd vM = grid.points().cwiseProduct(grid.equilibrium());
  CHECK((op.apply(vM) + vM).cwiseAbs().maxCoeff() < 1e-15);
  for (unsigned seed : {4u, 5u, 6u}) {
    VectorXd h = random_vector(grid.size(), seed);
    CHECK(std::abs(bracket(grid, op.apply(h))) < 1e-14);
  }
}

TEST_CASE("pseudo-inverse solves on the zero-mean subspace") {
  VelocityGridd grid(5.0, 10);
  auto op = CollisionOperator<double>::bgk(grid);
  VectorXd vM = grid.points().cwiseProduct(grid.equilibrium());
  CHECK((op.pseudo_inverse(vM) + vM).cwiseAbs().maxCoeff() < 1e-14);
  VectorXd v2M = grid.points().cwiseAbs2().cwiseProduct(grid.equilibrium());
  VectorXd h = v2M - bracket(grid, v2M) * grid.equilibrium();
  CHECK((op.pseudo_inverse(h) + h).cwiseAbs().maxCoeff() < 1e-14);
  // inputs with a mean component are rejected
  CHECK_THROWS_AS(op.pseudo_inverse(grid.equilibrium()), std::invalid_argument);
}

TEST_CASE("custom operators validate and invert with small residual") {
  VelocityGridd grid(4.0, 8);
  auto op = CollisionOperator<double>::custom(grid, random_admissible_matrix(grid, 11));
  CHECK(op.kappa() > 0.0);
  for (unsigned seed : {21u, 22u}) {
    VectorXd h = random_vector(grid.size(), seed);
    h -= bracket(grid, h) * grid.equilibrium();
    VectorXd u = op.pseudo_inverse(h);
    CHECK((op.apply(u) - h).cwiseAbs().maxCoeff() < 1e-11);
    CHECK(std::abs(bracket(grid, u)) < 1e-13);
  }
  // a matrix that moves M out of the null space is rejected
  MatrixXd bad = random_admissible_matrix(grid, 12);
  bad(0, 0) += 0.1;
  CHECK_FALSE(CollisionOperator<double>::check(grid, bad).empty());
}

TEST_CASE("stage resolvent closed forms for BGK") {
  VelocityGridd grid(5.0, 10);
  auto op = CollisionOperator<double>::bgk(grid);

  StageResolvent<double> r11(op, 1.0, 1.0);
  VectorXd h = random_vector(grid.size(), 31);
  h -= bracket(grid, h) * grid.equilibrium();  // Pi h = 0
  CHECK((r11.apply(h) - h / 2.0).cwiseAbs().maxCoeff() < 1e-14);

  StageResolvent<double> r0(op, 0.5, 0.0);
  VectorXd any = random_vector(grid.size(), 32);
  CHECK((r0.apply(any) - any / 0.25).cwiseAbs().maxCoeff() < 1e-13);

  // generic factorization matches (eps^2 + a dt)^{-1}(I + (a dt/eps^2) Pi)
  const double eps = 0.3, adt = 0.7;
  StageResolvent<double> r(op, eps, adt);
  for (unsigned seed : {33u, 34u}) {
    VectorXd g = random_vector(grid.size(), seed);
    VectorXd closed =
        (g + (adt / (eps * eps)) * project_pi(grid, g)) / (eps * eps + adt);
    CHECK((r.apply(g) - closed).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("resolvent expands to the pseudo-inverse at small eps") {
  VelocityGridd grid(5.0, 10);
  auto op = CollisionOperator<double>::bgk(grid);
  const double adt = 0.4;
  VectorXd h = random_vector(grid.size(), 41);
  h -= bracket(grid, h) * grid.equilibrium();
  VectorXd target = -op.pseudo_inverse(h) / adt;
  std::vector<double> errs;
  for (double eps : {1e-2, 1e-3, 1e-4}) {
    StageResolvent<double> r(op, eps, adt);
    errs.push_back((r.apply(h) - target).cwiseAbs().maxCoeff());
  }
  // second-order in eps: each decade drops the error by ~1e2
  CHECK(errs[1] / errs[0] == Catch::Approx(1e-2).epsilon(0.5));
  CHECK(errs[2] / errs[1] == Catch::Approx(1e-2).epsilon(0.5));
}

TEST_CASE("diffusion tensor closed form and limits") {
  VelocityGridd grid(5.0, 10);
  auto op = CollisionOperator<double>::bgk(grid);
  VectorXd v2M = grid.points().cwiseAbs2().cwiseProduct(grid.equilibrium());
  const double kappa0 = bracket(grid, v2M);
  const double eps = 0.7, adt = 1.3;
  StageResolvent<double> r(op, eps, adt);
  CHECK(diffusion_tensor(op, r) == Catch::Approx(kappa0 / (eps * eps + adt)).epsilon(1e-12));
  StageResolvent<double> rid(op, 1.0, 0.0);
  CHECK(diffusion_tensor(op, rid) == Catch::Approx(kappa0).epsilon(1e-12));
  // a dt -> infinity: a dt * D -> kappa
  StageResolvent<double> rbig(op, 1.0, 1e8);
  CHECK(1e8 * diffusion_tensor(op, rbig) == Catch::Approx(op.kappa()).epsilon(1e-6));
  CHECK(op.kappa() == Catch::Approx(kappa0).epsilon(1e-12));
}

TEST_CASE("kappa approaches the continuous Gaussian value under refinement") {
  const double coarse = std::abs(CollisionOperator<double>::bgk(VelocityGridd(5.0, 10)).kappa() - 1.0);
  const double fine = std::abs(CollisionOperator<double>::bgk(VelocityGridd(10.0, 200)).kappa() - 1.0);
  CHECK(fine < coarse);
  CHECK(fine < 1e-4);
}

TEST_CASE("advection-diffusion operator keeps a zero-mean range") {
  VelocityGridd grid(5.0, 10);
  auto op = CollisionOperator<double>::bgk(grid);
  VectorXd f = random_vector(grid.size(), 51);
  CHECK((op.advdiff_apply(0.0, 0.5, f) - op.apply(f)).cwiseAbs().maxCoeff() == 0.0);
  VectorXd vM = grid.points().cwiseProduct(grid.equilibrium());
  VectorXd fm = op.advdiff_apply(0.5, 0.1, grid.equilibrium());
  CHECK((fm - 0.1 * 0.5 * vM).cwiseAbs().maxCoeff() < 1e-14);
  CHECK(std::abs(bracket(grid, op.advdiff_apply(0.5, 0.1, f))) < 1e-14);
  CHECK_THROWS_AS(op.advdiff_apply(3.0, 0.5, f), std::invalid_argument);  // |eps A| >= 1
}

TEST_CASE("half-moment operator L~ and its factorizations") {
  VelocityGridd grid(5.0, 10);
  auto op = CollisionOperator<double>::bgk(grid);
  auto hs = HalfSet<double>::make(grid);
  MatrixXd lt = tilde_operator(op, hs);
  CHECK((lt * grid.equilibrium()).cwiseAbs().maxCoeff() < 1e-15);

  const Index n = grid.size();
  VectorXd half_row = hs.minus.cast<double>().matrix() * (grid.dv() / hs.minus_mass);
  MatrixXd pim = grid.equilibrium() * half_row.transpose();
  VectorXd full_row = VectorXd::Constant(n, grid.dv() / grid.equilibrium_mass());
  MatrixXd pi = grid.equilibrium() * full_row.transpose();
  MatrixXd i = MatrixXd::Identity(n, n);
  MatrixXd lt2 = (i - pim) * op.matrix() * (i - pim);
  MatrixXd lt3 = (i - pim) * op.matrix() * (i - pi);
  for (unsigned seed = 0; seed < 20; ++seed) {
    VectorXd h = random_vector(n, 100 + seed);
    CHECK((lt * h - lt2 * h).cwiseAbs().maxCoeff() < 1e-13);
    CHECK((lt * h - lt3 * h).cwiseAbs().maxCoeff() < 1e-13);
    CHECK(std::abs(half_bracket(grid, hs, VectorXd(lt * h))) < 1e-14);
  }

  // the constrained inverse undoes L~ on the zero-half-bracket subspace
  TildePseudoInverse<double> inv(grid, hs, lt);
  VectorXd jbar = grid.points().cwiseProduct(grid.equilibrium());
  jbar -= half_bracket(grid, hs, jbar) * grid.equilibrium();
  VectorXd u = inv.apply(jbar);
  CHECK((lt * u - jbar).cwiseAbs().maxCoeff() < 1e-13);
  CHECK(std::abs(half_bracket(grid, hs, u)) < 1e-13);
}
