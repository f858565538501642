#include "apmm/acceptance.hpp"

#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>

#include "apmm/experiments.hpp"

namespace apmm {

namespace {

const std::vector<double> kDtList = {0.1, 0.05, 0.01, 0.005, 0.001};
constexpr double kRefDt = 1e-4;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

double rel_linf(const VectorXd& a, const VectorXd& ref) {
  return (a - ref).lpNorm<Eigen::Infinity>() / ref.lpNorm<Eigen::Infinity>();
}

PeriodicScenario diffusion_bench(InitialData data) {
  PeriodicScenario sc;
  sc.data = data;
  return sc;  // defaults already match the time-order setup
}

struct SlopeCase {
  std::string scheme;
  double eps;
  InitialData data;
  double expected;
};

bool check_slopes(const std::vector<SlopeCase>& cases, double tol,
                  const std::function<StudyResult(const SlopeCase&)>& runner, std::string& details) {
  bool ok = true;
  std::ostringstream os;
  for (const auto& c : cases) {
    StudyResult r = runner(c);
    const bool good = std::abs(r.fit_l2.slope - c.expected) <= tol;
    ok = ok && good;
    os << c.scheme << "@eps=" << fmt(c.eps) << (c.data == InitialData::well_prepared ? "/WP" : "/N-WP")
       << ": slope " << fmt(r.fit_l2.slope) << " (want " << fmt(c.expected) << "+-" << fmt(tol) << ")"
       << (good ? "" : " <-- FAIL") << "; ";
  }
  details = os.str();
  return ok;
}

CriterionResult c1_time_order() {
  CriterionResult res{1, "time order, diffusion scaling (self-reference)", false, ""};
  std::vector<SlopeCase> cases = {
      {"DP_A121", 1.0, InitialData::non_well_prepared, 1.0},
      {"DP_A121", 1e-4, InitialData::non_well_prepared, 1.0},
      {"DP2_A242", 1.0, InitialData::non_well_prepared, 2.0},
      {"DP2_A242", 1e-4, InitialData::non_well_prepared, 2.0},
      {"DP1_A242", 1.0, InitialData::non_well_prepared, 2.0},
      {"DP1_A242", 1e-4, InitialData::non_well_prepared, 3.0},
      {"ARS111", 1.0, InitialData::non_well_prepared, 1.0},
      {"ARS111", 1e-4, InitialData::well_prepared, 1.0},
      {"ARS222", 1e-4, InitialData::well_prepared, 2.0},
      {"ARS443", 1e-4, InitialData::well_prepared, 3.0},
  };
  res.pass = check_slopes(
      cases, 0.3,
      [](const SlopeCase& c) {
        return time_study_periodic(builtin_tableau<double>(c.scheme), c.eps, kDtList, kRefDt,
                                   diffusion_bench(c.data));
      },
      res.details);
  return res;
}

CriterionResult c2_nwp_failure() {
  CriterionResult res{2, "CK-ARS non-well-prepared failure", false, ""};
  bool ok = true;
  std::ostringstream os;
  for (const std::string scheme : {"ARS222", "ARS443"}) {
    StudyResult r = time_study_periodic(builtin_tableau<double>(scheme), 1e-4, kDtList, kRefDt,
                                        diffusion_bench(InitialData::non_well_prepared));
    const bool good = r.fit_l2.slope <= 1.3;
    ok = ok && good;
    os << scheme << " N-WP slope " << fmt(r.fit_l2.slope) << " (want <= 1.3)" << (good ? "" : " <-- FAIL")
       << "; ";
  }
  res.pass = ok;
  res.details = os.str();
  return res;
}

CriterionResult c3_diffusion_plateau() {
  CriterionResult res{3, "diffusion-reference error floor for ARS443", false, ""};
  StudyResult r = time_study_periodic(builtin_tableau<double>("ARS443"), 1e-4, kDtList, kRefDt,
                                      diffusion_bench(InitialData::well_prepared), TimeReference::diffusion);
  double e_005 = 0, e_001 = 0;
  for (size_t i = 0; i < r.steps.size(); ++i) {
    if (r.steps[i] == 0.005) e_005 = r.l2[i];
    if (r.steps[i] == 0.001) e_001 = r.l2[i];
  }
  const double ratio = e_005 / e_001;
  res.pass = ratio <= 3.0 && ratio >= 1.0 / 3.0;
  res.details = "err(dt=0.005)=" + fmt(e_005) + ", err(dt=0.001)=" + fmt(e_001) + ", ratio " + fmt(ratio) +
                " (want within factor 3)";
  return res;
}

// Known to exceed the target: at T=0.01 the density error is dominated by the
// composed fourth-order central channel (the third-order upwind truncation
// feeds rho only through a double time integration, and vanishes entirely in
// the eps->0 limit scheme), so the measured slopes sit near 4.
CriterionResult c4_space_order() {
  CriterionResult res{4, "space order with third-order stencils", false, ""};
  const std::vector<Index> nxs = {20, 24, 30, 40, 60};
  bool ok = true;
  std::ostringstream os;
  struct Case {
    std::string scheme;
    InitialData data;
  };
  for (const Case& c : {Case{"DP1_A242", InitialData::non_well_prepared},
                        Case{"ARS443", InitialData::well_prepared}}) {
    for (double eps : {1e-4, 0.2, 1.0}) {
      PeriodicScenario sc = diffusion_bench(c.data);
      sc.t_final = 0.01;
      StudyResult r = space_study_periodic(builtin_tableau<double>(c.scheme), eps, nxs, 120, 0.001, sc);
      const bool good = std::abs(r.fit_l2.slope - 3.0) <= 0.3;
      ok = ok && good;
      os << c.scheme << "@eps=" << fmt(eps) << ": slope " << fmt(r.fit_l2.slope) << (good ? "" : " <-- FAIL")
         << "; ";
    }
  }
  res.pass = ok;
  res.details = os.str();
  return res;
}

PeriodicScenario advdiff_bench(InitialData data) {
  PeriodicScenario sc;
  sc.n_x = 20;
  sc.grid = SpatialGrid::staggered;
  sc.upwind_order = 1;
  sc.profile = "sin";
  sc.drift = 0.5;
  sc.data = data;
  return sc;
}

// The ARS443 entry at eps=1e-4 carries an intrinsic O(eps dt) transition term
// (the first CK-ARS stage passes the previous micro state through unchanged,
// and the explicit drift couples to it at O(eps)); it floors the fine end of
// the window and drags the fitted slope below 3 even though the eps->0 limit
// map is the full third-order IMEX scheme.
CriterionResult c5_advdiff_order() {
  CriterionResult res{5, "advection-diffusion time orders", false, ""};
  std::vector<SlopeCase> cases = {
      {"DP1_A242", 1.0, InitialData::non_well_prepared, 2.0},
      {"DP1_A242", 1e-4, InitialData::non_well_prepared, 2.0},
      {"ARS443", 1.0, InitialData::well_prepared, 3.0},
      {"ARS443", 1e-4, InitialData::well_prepared, 3.0},
  };
  res.pass = check_slopes(
      cases, 0.3,
      [](const SlopeCase& c) {
        return time_study_periodic(builtin_tableau<double>(c.scheme), c.eps, kDtList, kRefDt,
                                   advdiff_bench(c.data));
      },
      res.details);
  return res;
}

CriterionResult c6_inflow_order() {
  CriterionResult res{6, "inflow time orders", false, ""};
  std::vector<SlopeCase> cases = {
      {"DP_A121", 1.0, InitialData::non_well_prepared, 1.0},
      {"DP_A121", 1e-4, InitialData::non_well_prepared, 1.0},
      {"DP1_A242", 1.0, InitialData::non_well_prepared, 2.0},
      {"DP1_A242", 1e-4, InitialData::non_well_prepared, 3.0},
  };
  res.pass = check_slopes(
      cases, 0.3,
      [](const SlopeCase& c) {
        InflowScenario sc;
        return time_study_inflow(builtin_tableau<double>(c.scheme), c.eps, kDtList, kRefDt, sc);
      },
      res.details);
  return res;
}

CriterionResult c7_ap_residual() {
  CriterionResult res{7, "AP residual slope after one type-A step", false, ""};
  const std::vector<double> eps_list = {1e-3, 1e-4, 1e-5};
  bool ok = true;
  std::ostringstream os;
  for (const std::string scheme : {"DP_A121", "DP2_A242", "DP1_A242"}) {
    std::vector<double> residuals;
    for (double eps : eps_list) {
      PeriodicConfig<double> cfg;
      cfg.tableau = builtin_tableau<double>(scheme);
      cfg.eps = eps;
      cfg.dt = 0.01;
      cfg.n_x = 50;
      VelocityGridd grid = make_grid(5, 10);
      auto collision = CollisionOperator<double>::bgk(grid);
      MicroMacroSolverd solver(cfg, grid, collision);
      auto state = solver.init_non_well_prepared(named_profile("1+cos"));
      solver.step(state);
      residuals.push_back(ap_residual(state.g, state.rho, eps, collision, solver.grad_op()));
    }
    const double slope = observed_order(residuals, eps_list).slope;
    const bool good = std::abs(slope - 2.0) <= 0.2;
    ok = ok && good;
    os << scheme << ": slope " << fmt(slope) << (good ? "" : " <-- FAIL") << "; ";
  }
  res.pass = ok;
  res.details = os.str();
  return res;
}

CriterionResult c8_limit_equivalence() {
  CriterionResult res{8, "one-step equivalence with the eps->0 limit schemes at eps=1e-8", false, ""};
  const double eps = 1e-8, dt = 0.01;
  bool ok = true;
  std::ostringstream os;

  {  // periodic diffusion limit
    PeriodicConfig<double> cfg;
    cfg.tableau = builtin_tableau<double>("DP1_A242");
    cfg.eps = eps;
    cfg.dt = dt;
    cfg.n_x = 50;
    VelocityGridd grid = make_grid(5, 10);
    auto collision = CollisionOperator<double>::bgk(grid);
    MicroMacroSolverd solver(cfg, grid, collision);
    auto state = solver.init_non_well_prepared(named_profile("1+cos"));
    solver.step(state);
    VectorXd rho_ref = solver.rho_nodes().unaryExpr(named_profile("1+cos"));
    DiffusionDirk<double> diff(cfg.tableau, dt, collision.kappa(), solver.div_op(), solver.grad_op());
    diff.step(rho_ref);
    const double dev = rel_linf(state.rho, rho_ref);
    ok = ok && dev <= 1e-6;
    os << "diffusion dev " << fmt(dev) << (dev <= 1e-6 ? "" : " <-- FAIL") << "; ";
  }

  {  // advection-diffusion limit on the staggered grid
    PeriodicScenario sc = advdiff_bench(InitialData::non_well_prepared);
    PeriodicConfig<double> cfg;
    cfg.tableau = builtin_tableau<double>("DP1_A242");
    cfg.eps = eps;
    cfg.dt = dt;
    cfg.n_x = sc.n_x;
    cfg.grid = SpatialGrid::staggered;
    cfg.upwind_order = 1;
    VelocityGridd grid = make_grid(5, 10);
    auto collision = CollisionOperator<double>::bgk(grid);
    MicroMacroSolverd solver(cfg, grid, collision, sc.drift);
    auto state = solver.init_non_well_prepared(named_profile("sin"));
    solver.step(state);
    VectorXd rho_ref = solver.rho_nodes().unaryExpr(named_profile("sin"));
    AdvDiffLimit<double> lim(cfg.tableau, dt, collision.kappa(), sc.drift, solver.div_op(), solver.grad_op(),
                             average_to_g<double>(sc.n_x));
    lim.step(rho_ref);
    const double dev = rel_linf(state.rho, rho_ref);
    ok = ok && dev <= 1e-6;
    os << "advdiff dev " << fmt(dev) << (dev <= 1e-6 ? "" : " <-- FAIL") << "; ";
  }

  {  // first-order inflow step against the displayed limit map
    InflowConfig<double> cfg;
    cfg.tableau = builtin_tableau<double>("ARS111");
    cfg.eps = eps;
    cfg.dt = dt;
    cfg.n_x = 20;
    VelocityGridd grid = make_grid(5, 10);
    auto collision = CollisionOperator<double>::bgk(grid);
    InflowSolver<double> solver(cfg, grid, collision, InflowBoundary<double>::equilibrium(grid, 1.0));
    auto state = solver.initial_state();
    solver.step_first_order(state);
    VectorXd ref = inflow_limit_step(VectorXd(VectorXd::Zero(cfg.n_x - 2)), dt, grid, solver.half_set(),
                                     collision, cfg.n_x, solver.dx(), 1.0, 0.0);
    const double dev = rel_linf(state.rho_bar, ref);
    ok = ok && dev <= 1e-6;
    os << "inflow dev " << fmt(dev) << (dev <= 1e-6 ? "" : " <-- FAIL") << "; ";
  }

  res.pass = ok;
  res.details = os.str();
  return res;
}

CriterionResult c9_pi_identities() {
  CriterionResult res{9, "Pi-tensor recurrence, vanishing and limit identities", false, ""};
  VelocityGridd grid = make_grid(3, 6);
  auto collision = CollisionOperator<double>::bgk(grid);
  std::mt19937 rng(20240811);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const Index n_x = 8;
  bool ok = true;
  std::ostringstream os;
  for (const std::string scheme : {"DP_A121", "DP2_A242", "DP1_A242"}) {
    auto tab = builtin_tableau<double>(scheme);
    double worst_rec = 0, worst_vanish = 0, worst_limit = 0;
    for (int draw = 0; draw < 100; ++draw) {
      std::vector<VectorXd> r1(tab.stages), r2(tab.stages);
      for (Index k = 0; k < tab.stages; ++k) {
        r1[k] = VectorXd::NullaryExpr(n_x, [&](Index) { return u(rng); });
        r2[k] = VectorXd::NullaryExpr(n_x, [&](Index) { return u(rng); });
      }
      PiTensorEvaluator<double> pi(tab, grid, collision, r1, r2);
      for (Index j = 2; j <= tab.stages; ++j) {
        for (Index m = 2; m <= j; ++m) {
          VectorXd lhs = pi.eval(j, j, m);
          VectorXd rhs = VectorXd::Zero(n_x);
          for (Index k1 = 1; k1 < j; ++k1) rhs += pi.eval(j, k1, m - 1);
          worst_rec = std::max(worst_rec, (lhs - rhs).lpNorm<Eigen::Infinity>());
        }
        for (Index k1 = 1; k1 < j; ++k1)
          worst_vanish = std::max(worst_vanish, pi.eval(j, k1, j).lpNorm<Eigen::Infinity>());
      }
      worst_limit = std::max(worst_limit, limit_scheme_check(pi));
    }
    const bool good = worst_rec <= 1e-12 && worst_vanish <= 1e-12 && worst_limit <= 1e-12;
    ok = ok && good;
    os << scheme << ": rec " << fmt(worst_rec) << ", vanish " << fmt(worst_vanish) << ", limit "
       << fmt(worst_limit) << (good ? "" : " <-- FAIL") << "; ";
  }
  res.pass = ok;
  res.details = os.str();
  return res;
}

CriterionResult c10_structural() {
  CriterionResult res{10, "structural invariants", false, ""};
  bool ok = true;
  std::ostringstream os;

  for (const auto& name : builtin_tableau_names()) {
    auto t = builtin_tableau<double>(name);
    if (!validate(t).empty() || !is_gsa(t)) {
      ok = false;
      os << name << " fails validation; ";
    }
  }

  // full-run bracket and mass monitors
  for (double eps : {1.0, 1e-4}) {
    PeriodicScenario sc = diffusion_bench(InitialData::non_well_prepared);
    RunOutput out = run_periodic(builtin_tableau<double>("DP1_A242"), eps, 0.005, sc);
    const bool good = out.stats.max_g_bracket <= 1e-9 && out.stats.mass_drift <= 1e-10;
    ok = ok && good;
    os << "eps=" << fmt(eps) << ": max<g> " << fmt(out.stats.max_g_bracket) << ", mass drift "
       << fmt(out.stats.mass_drift) << (good ? "" : " <-- FAIL") << "; ";
  }

  {  // stencil refinement orders
    struct StencilCase {
      std::string label;
      int nominal;
      std::function<StencilMatrix<double>(Index, double)> make;
    };
    std::vector<StencilCase> cases = {
        {"upwind1", 1, [](Index n, double dx) { return upwind_pair<double>(1, n, dx).first; }},
        {"central2", 2, [](Index n, double dx) { return central_colocated<double>(2, n, dx); }},
        {"upwind3", 3, [](Index n, double dx) { return upwind_pair<double>(3, n, dx).first; }},
        {"central4", 4, [](Index n, double dx) { return central_colocated<double>(4, n, dx); }},
    };
    for (const auto& c : cases) {
      std::vector<double> errs, hs;
      for (Index n : {32, 64, 128}) {
        const double dx = 2 * EIGEN_PI / static_cast<double>(n);
        VectorXd x(n), f(n), df(n);
        for (Index i = 0; i < n; ++i) {
          x[i] = i * dx;
          f[i] = std::sin(x[i]);
          df[i] = std::cos(x[i]);
        }
        errs.push_back((c.make(n, dx).apply(f) - df).cwiseAbs().maxCoeff());
        hs.push_back(dx);
      }
      const double slope = observed_order(errs, hs).slope;
      const bool good = std::abs(slope - c.nominal) <= 0.2;
      ok = ok && good;
      os << c.label << " slope " << fmt(slope) << (good ? "" : " <-- FAIL") << "; ";
    }
  }

  {  // projection idempotence
    VelocityGridd grid = make_grid(5, 10);
    auto hs = HalfSet<double>::make(grid);
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    double worst = 0;
    for (int i = 0; i < 20; ++i) {
      VectorXd h = VectorXd::NullaryExpr(grid.size(), [&](Index) { return u(rng); });
      VectorXd p = project_pi(grid, h);
      worst = std::max(worst, (project_pi(grid, p) - p).lpNorm<Eigen::Infinity>());
      VectorXd q = project_pi_minus(grid, hs, h);
      worst = std::max(worst, (project_pi_minus(grid, hs, q) - q).lpNorm<Eigen::Infinity>());
    }
    const bool good = worst <= 1e-13;
    ok = ok && good;
    os << "projection idempotence " << fmt(worst) << (good ? "" : " <-- FAIL");
  }

  res.pass = ok;
  res.details = os.str();
  return res;
}

CriterionResult c11_qualitative() {
  CriterionResult res{11, "qualitative regime agreement", false, ""};
  bool ok = true;
  std::ostringstream os;
  auto tab = builtin_tableau<double>("DP1_A242");

  {  // periodic, rarefied: micro-macro against the kinetic reference
    PeriodicScenario sc = diffusion_bench(InitialData::non_well_prepared);
    sc.n_x = 20;
    auto cmp = compare_periodic(tab, 1.0, 0.005, sc, true, false);
    const double dev = rel_linf(cmp.rho.at("micromacro"), cmp.rho.at("bgk"));
    ok = ok && dev <= 2e-2;
    os << "periodic MM/BGK@eps=1: " << fmt(dev) << (dev <= 2e-2 ? "" : " <-- FAIL") << "; ";
  }
  {  // periodic, diffusive: against the diffusion model
    PeriodicScenario sc = diffusion_bench(InitialData::non_well_prepared);
    sc.n_x = 20;
    auto cmp = compare_periodic(tab, 1e-4, 0.005, sc, false, true);
    const double dev = rel_linf(cmp.rho.at("micromacro"), cmp.rho.at("diffusion"));
    ok = ok && dev <= 1e-2;
    os << "periodic MM/diff@eps=1e-4: " << fmt(dev) << (dev <= 1e-2 ? "" : " <-- FAIL") << "; ";
  }
  {  // equilibrium inflow; the kinetic check compares interior unknowns
    // (the wall values are partially prescribed data in both solvers).
    // Known to exceed the 2e-2 target: at eps=1, T=0.1 the transport is
    // near-ballistic and rho carries O(0.3) jumps at the discrete-velocity
    // beam fronts, which two independent first-order discretizations smear
    // differently at any affordable resolution (the two solvers do converge
    // to each other under refinement).
    InflowScenario sc;
    sc.n_x = 40;
    auto cmp1 = compare_inflow(tab, 1.0, 0.001, sc, true, false);
    const Index ni = cmp1.x.size() - 2;
    const VectorXd mm1 = cmp1.rho.at("micromacro").segment(1, ni);
    const VectorXd bg1 = cmp1.rho.at("bgk").segment(1, ni);
    const double dev1 = rel_linf(mm1, bg1);
    ok = ok && dev1 <= 2e-2;
    os << "inflow MM/BGK@eps=1: " << fmt(dev1) << (dev1 <= 2e-2 ? "" : " <-- FAIL") << "; ";
    auto cmp2 = compare_inflow(tab, 1e-4, 0.001, sc, false, true);
    const double dev2 = rel_linf(cmp2.rho.at("micromacro"), cmp2.rho.at("diffusion"));
    ok = ok && dev2 <= 1e-2;
    os << "inflow MM/diff@eps=1e-4: " << fmt(dev2) << (dev2 <= 1e-2 ? "" : " <-- FAIL") << "; ";
  }
  {  // non-equilibrium inflow: boundary layer against the Klar diffusion run;
    // the near-wall window includes the wall node, where the half-moment
    // boundary value departs from the diffusion extrapolation
    InflowScenario sc;
    sc.n_x = 40;
    sc.boundary = "scaled-velocity";
    auto cmp = compare_inflow(tab, 1e-4, 0.001, sc, false, true);
    const VectorXd diff = (cmp.rho.at("micromacro") - cmp.rho.at("diffusion")).cwiseAbs();
    double near = 0, interior = 0;
    for (Index i = 0; i < cmp.x.size(); ++i) {
      if (cmp.x[i] < 0.3)
        near = std::max(near, diff[i]);
      else
        interior = std::max(interior, diff[i]);
    }
    const bool good = near >= 5.0 * interior;
    ok = ok && good;
    os << "boundary layer: near " << fmt(near) << " vs interior " << fmt(interior)
       << (good ? "" : " <-- FAIL");
  }

  res.pass = ok;
  res.details = os.str();
  return res;
}

}  // namespace

std::vector<CriterionResult> run_acceptance(const std::string& filter) {
  using Maker = std::function<CriterionResult()>;
  const std::vector<Maker> criteria = {c1_time_order,    c2_nwp_failure, c3_diffusion_plateau,
                                       c4_space_order,   c5_advdiff_order, c6_inflow_order,
                                       c7_ap_residual,   c8_limit_equivalence, c9_pi_identities,
                                       c10_structural,   c11_qualitative};
  std::vector<CriterionResult> out;
  int id = 1;
  for (const auto& make : criteria) {
    const std::string tag = "C" + std::to_string(id);
    ++id;
    if (!filter.empty() && tag != filter && tag.find(filter) == std::string::npos) continue;
    try {
      out.push_back(make());
    } catch (const std::exception& e) {
      out.push_back({id - 1, tag, false, std::string("exception: ") + e.what()});
    }
  }
  return out;
}

bool report_acceptance(const std::vector<CriterionResult>& results) {
  bool all = true;
  for (const auto& r : results) {
    std::printf("%s C%d: %s | %s\n", r.pass ? "PASS" : "FAIL", r.id, r.name.c_str(), r.details.c_str());
    all = all && r.pass;
  }
  return all;
}

}  // namespace apmm
