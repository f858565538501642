#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "apmm/experiments.hpp"
#include "apmm/reference.hpp"

using namespace apmm;

TEST_CASE("spatially constant equilibrium is stationary for the kinetic solver") {
  VelocityGridd grid(5.0, 10);
  auto op = CollisionOperator<double>::bgk(grid);
  typename KineticSolver<double>::Config cfg;
  cfg.tableau = builtin_tableau<double>("DP1_A242");
  cfg.eps = 1.0;
  cfg.dt = 0.005;
  cfg.n_x = 16;
  KineticSolver<double> solver(cfg, grid, op);
  auto state = solver.initial_state([](double) { return 1.7; }, 0.0);
  MatrixXd before = state.f;
  for (int i = 0; i < 10; ++i) solver.step(state);
  CHECK((state.f - before).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("kinetic solver conserves mass on the periodic domain") {
  VelocityGridd grid(5.0, 10);
  auto op = CollisionOperator<double>::bgk(grid);
  typename KineticSolver<double>::Config cfg;
  cfg.tableau = builtin_tableau<double>("ARS222");
  cfg.eps = 0.8;
  cfg.dt = 0.002;
  cfg.n_x = 24;
  KineticSolver<double> solver(cfg, grid, op);
  auto state = solver.initial_state([](double x) { return 1.0 + std::cos(x); }, 1.0);
  const double mass0 = solver.density(state).sum();
  for (int i = 0; i < 100; ++i) solver.step(state);
  CHECK(std::abs(solver.density(state).sum() - mass0) / std::abs(mass0) < 1e-11);
}

TEST_CASE("micro-macro and kinetic densities agree in the rarefied periodic regime") {
  PeriodicScenario sc;
  sc.n_x = 20;
  sc.data = InitialData::non_well_prepared;
  auto cmp = compare_periodic(builtin_tableau<double>("DP1_A242"), 1.0, 0.005, sc, true, false);
  const VectorXd& mm = cmp.rho.at("micromacro");
  const VectorXd& bgk = cmp.rho.at("bgk");
  CHECK((mm - bgk).lpNorm<Eigen::Infinity>() / bgk.lpNorm<Eigen::Infinity>() <= 2e-2);
}

TEST_CASE("diffusion DIRK solver basics") {
  const Index n = 16;
  const double dx = 2 * EIGEN_PI / n;
  auto div = central_div_to_rho<double>(n, dx);
  auto grad = central_grad_to_g<double>(n, dx);
  auto tab = builtin_tableau<double>("DP1_A242");

  DiffusionDirk<double> frozen(tab, 0.01, 0.0, div, grad);
  VectorXd rho = VectorXd::LinSpaced(n, 0.0, 1.0);
  VectorXd before = rho;
  frozen.step(rho);
  CHECK((rho - before).cwiseAbs().maxCoeff() == 0.0);  // kappa = 0 is the identity map

  DiffusionDirk<double> diff(tab, 0.01, 1.3, div, grad);
  VectorXd flat = VectorXd::Constant(n, 0.7);
  diff.step(flat);
  CHECK((flat.array() - 0.7).abs().maxCoeff() < 1e-14);
}

TEST_CASE("heat decay follows the circulant-eigenvalue recursion exactly") {
  const Index n = 32;
  const double dx = 2 * EIGEN_PI / n;
  const double kappa = 0.9, dt = 0.01;
  auto div = central_div_to_rho<double>(n, dx);
  auto grad = central_grad_to_g<double>(n, dx);
  auto tab = builtin_tableau<double>("DP1_A242");
  DiffusionDirk<double> diff(tab, dt, kappa, div, grad);

  VectorXd x(n), rho(n);
  for (Index i = 0; i < n; ++i) {
    x[i] = i * dx;
    rho[i] = 1.0 + std::cos(x[i]);
  }
  const Index steps = 100;
  for (Index i = 0; i < steps; ++i) diff.step(rho);

  // oracle: cos(x) is an eigenvector of the composed circulant with eigenvalue
  // -lambda; propagate the scalar DIRK recursion on it
  const double lambda = (2.0 - 2.0 * std::cos(dx)) / (dx * dx);
  const double z = -kappa * lambda * dt;
  double amp = 1.0;
  const auto& a = tab.a_implicit;
  for (Index step = 0; step < steps; ++step) {
    std::vector<double> y(tab.stages);
    for (Index j = 0; j < tab.stages; ++j) {
      double rhs = amp;
      for (Index k = 0; k < j; ++k) rhs += a(j, k) * z * y[k];
      y[j] = rhs / (1.0 - a(j, j) * z);
    }
    amp = y[tab.stages - 1];
  }
  VectorXd expected = VectorXd::Ones(n) + amp * x.array().cos().matrix();
  CHECK((rho - expected).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("the DIRK part of DP1_A242 is third-order accurate") {
  const Index n = 24;
  const double dx = 2 * EIGEN_PI / n;
  auto div = central_div_to_rho<double>(n, dx);
  auto grad = central_grad_to_g<double>(n, dx);
  auto tab = builtin_tableau<double>("DP1_A242");
  VectorXd rho0(n);
  for (Index i = 0; i < n; ++i) rho0[i] = 1.0 + std::cos(i * dx);
  auto solve = [&](double dt) {
    DiffusionDirk<double> d(tab, dt, 1.0, div, grad);
    VectorXd r = rho0;
    d.run(r, 0.5);
    return r;
  };
  VectorXd fine = solve(1e-4);
  std::vector<double> dts = {0.05, 0.02, 0.01, 0.005}, errs;
  for (double dt : dts) errs.push_back((solve(dt) - fine).lpNorm<Eigen::Infinity>());
  CHECK(observed_order(errs, dts).slope == Catch::Approx(3.0).margin(0.25));
}

TEST_CASE("advection-diffusion limit solver reductions") {
  const Index n = 20;
  const double dx = 2 * EIGEN_PI / n;
  auto div = central_div_to_rho<double>(n, dx);
  auto grad = central_grad_to_g<double>(n, dx);
  auto avg = average_to_g<double>(n);
  auto tab = builtin_tableau<double>("DP1_A242");
  VectorXd rho0(n);
  for (Index i = 0; i < n; ++i) rho0[i] = std::sin(i * dx);

  // A = 0 equals the diffusion solver
  AdvDiffLimit<double> lim0(tab, 0.01, 1.1, 0.0, div, grad, avg);
  DiffusionDirk<double> diff(tab, 0.01, 1.1, div, grad);
  VectorXd a = rho0, b = rho0;
  lim0.step(a);
  diff.step(b);
  CHECK((a - b).cwiseAbs().maxCoeff() < 1e-14);

  // kappa = 0 kills both terms and preserves constants trivially
  AdvDiffLimit<double> lim1(tab, 0.01, 0.0, 0.7, div, grad, avg);
  VectorXd flat = VectorXd::Constant(n, 2.0);
  lim1.step(flat);
  CHECK((flat.array() - 2.0).abs().maxCoeff() < 1e-14);
}

TEST_CASE("Klar boundary value") {
  VelocityGridd grid(5.0, 10);
  auto op = CollisionOperator<double>::bgk(grid);
  const double kappa = op.kappa();
  CHECK(klar_boundary_rho(VectorXd(grid.equilibrium()), grid, kappa) == Catch::Approx(1.0).margin(1e-14));
  CHECK(klar_boundary_rho(VectorXd(3.0 * grid.equilibrium()), grid, kappa) ==
        Catch::Approx(3.0).margin(1e-13));

  VectorXd fb = grid.points().cwiseProduct(grid.equilibrium());
  // direct-summation oracle of the displayed formula
  long double num = 0, den = 0, corr = 0, mass = 0;
  const auto& v = grid.points();
  const auto& M = grid.equilibrium();
  for (Index k = 0; k < grid.size(); ++k) {
    mass += M[k] * grid.dv();
    if (v[k] > 0) {
      num += v[k] * fb[k] * grid.dv();
      den += v[k] * M[k] * grid.dv();
    }
  }
  const long double ratio = num / den;
  for (Index k = 0; k < grid.size(); ++k)
    if (v[k] > 0) corr += v[k] * v[k] * (fb[k] - M[k] * ratio) * grid.dv();
  const double expected = static_cast<double>(ratio + corr / (kappa * mass));
  const double got = klar_boundary_rho(fb, grid, kappa);
  CHECK(got == Catch::Approx(expected).epsilon(1e-14));
  CHECK(got > static_cast<double>(ratio));  // positive v^2-weighted correction
}
