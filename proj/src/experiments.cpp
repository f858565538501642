#include "apmm/experiments.hpp"

#include <atomic>
#include <cmath>
#include <stdexcept>
#include <thread>

namespace apmm {

std::function<double(double)> named_profile(const std::string& name) {
  if (name == "1+cos") return [](double x) { return 1.0 + std::cos(x); };
  if (name == "sin") return [](double x) { return std::sin(x); };
  if (name == "cos") return [](double x) { return std::cos(x); };
  if (name == "one") return [](double) { return 1.0; };
  if (name == "zero") return [](double) { return 0.0; };
  throw std::invalid_argument("unknown profile '" + name + "' (use 1+cos, sin, cos, one, zero)");
}

VelocityGridd make_grid(double v_max, Index n_v) { return VelocityGridd(v_max, n_v); }

InflowBoundary<double> make_boundary(const VelocityGridd& grid, const std::string& spec) {
  if (spec.rfind("equilibrium", 0) == 0) {
    double value = 1.0;
    auto colon = spec.find(':');
    if (colon != std::string::npos) value = std::stod(spec.substr(colon + 1));
    return InflowBoundary<double>::equilibrium(grid, value);
  }
  if (spec == "scaled-velocity") return InflowBoundary<double>::scaled_velocity(grid);
  if (spec.rfind("table:", 0) == 0) {
    std::string rest = spec.substr(6);
    GhostPolicy policy = GhostPolicy::direct;
    auto colon = rest.find(':');
    if (colon != std::string::npos) {
      std::string p = rest.substr(colon + 1);
      rest = rest.substr(0, colon);
      if (p == "mirrored") policy = GhostPolicy::mirrored;
      else if (p != "direct") throw std::invalid_argument("boundary table policy must be direct or mirrored");
    }
    MatrixXd m = load_matrix(rest);
    if (m.size() != grid.size()) throw std::invalid_argument("boundary table size mismatch");
    VectorXd vals = Eigen::Map<VectorXd>(m.data(), m.size());
    return InflowBoundary<double>::custom(vals, policy);
  }
  throw std::invalid_argument("unknown boundary spec '" + spec + "'");
}

void parallel_for(Index n, const std::function<void(Index)>& fn) {
  const unsigned workers = std::min<unsigned>(std::thread::hardware_concurrency(), static_cast<unsigned>(n));
  if (workers <= 1) {
    for (Index i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<Index> next{0};
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  for (unsigned w = 0; w < workers; ++w)
    pool.emplace_back([&, w] {
      try {
        for (Index i = next++; i < n; i = next++) fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

namespace {

MicroMacroSolverd make_periodic_solver(const DoubleButcherTableaud& tableau, double eps, double dt,
                                       const PeriodicScenario& sc) {
  PeriodicConfig<double> cfg;
  cfg.tableau = tableau;
  cfg.eps = eps;
  cfg.dt = dt;
  cfg.n_x = sc.n_x;
  cfg.domain_length = sc.domain_length;
  cfg.grid = sc.grid;
  cfg.upwind_order = sc.upwind_order;
  cfg.central_order = sc.central_order;
  VelocityGridd grid = make_grid(sc.v_max, sc.n_v);
  auto collision = CollisionOperator<double>::bgk(grid);
  DriftConfig<double> drift{sc.drift};
  return make_advdiff_solver(cfg, drift, grid, collision);
}

MicroMacroState<double> make_initial(const MicroMacroSolverd& solver, const PeriodicScenario& sc) {
  auto profile = named_profile(sc.profile);
  return sc.data == InitialData::well_prepared ? solver.init_well_prepared(profile)
                                               : solver.init_non_well_prepared(profile);
}

InflowSolver<double> make_inflow_solver(const DoubleButcherTableaud& tableau, double eps, double dt,
                                        const InflowScenario& sc) {
  InflowConfig<double> cfg;
  cfg.tableau = tableau;
  cfg.eps = eps;
  cfg.dt = dt;
  cfg.n_x = sc.n_x;
  cfg.domain_length = sc.domain_length;
  VelocityGridd grid = make_grid(sc.v_max, sc.n_v);
  auto collision = CollisionOperator<double>::bgk(grid);
  return InflowSolver<double>(cfg, grid, collision, make_boundary(grid, sc.boundary));
}

StudyResult fit_study(std::vector<double> steps, std::vector<double> l2, std::vector<double> linf) {
  StudyResult r;
  r.steps = std::move(steps);
  r.l2 = std::move(l2);
  r.linf = std::move(linf);
  r.fit_l2 = observed_order(r.l2, r.steps);
  r.fit_linf = observed_order(r.linf, r.steps);
  return r;
}

}  // namespace

RunOutput run_periodic(const DoubleButcherTableaud& tableau, double eps, double dt,
                       const PeriodicScenario& sc) {
  auto solver = make_periodic_solver(tableau, eps, dt, sc);
  auto state = make_initial(solver, sc);
  RunOutput out;
  out.stats = solver.run(state, sc.t_final);
  out.x = solver.rho_nodes();
  out.rho = state.rho;
  return out;
}

RunOutput run_inflow(const DoubleButcherTableaud& tableau, double eps, double dt, const InflowScenario& sc) {
  auto solver = make_inflow_solver(tableau, eps, dt, sc);
  auto state = solver.initial_state();
  RunOutput out;
  out.stats = solver.run(state, sc.t_final);
  out.x = solver.interior_nodes();
  out.rho = state.rho;
  return out;
}

StudyResult time_study_periodic(const DoubleButcherTableaud& tableau, double eps,
                                const std::vector<double>& dts, double ref_dt, const PeriodicScenario& sc,
                                TimeReference reference) {
  const Index n = static_cast<Index>(dts.size());
  std::vector<VectorXd> rho(n);
  VectorXd rho_ref;
  const double dx = sc.domain_length / static_cast<double>(sc.n_x);
  parallel_for(n + 1, [&](Index i) {
    if (i < n) {
      rho[i] = run_periodic(tableau, eps, dts[static_cast<size_t>(i)], sc).rho;
      return;
    }
    if (reference == TimeReference::self) {
      rho_ref = run_periodic(tableau, eps, ref_dt, sc).rho;
    } else {
      auto solver = make_periodic_solver(tableau, eps, ref_dt, sc);
      DiffusionDirk<double> diff(tableau, ref_dt, solver.collision().kappa(), solver.div_op(),
                                 solver.grad_op());
      VectorXd r = solver.rho_nodes().unaryExpr(named_profile(sc.profile));
      diff.run(r, sc.t_final);
      rho_ref = r;
    }
  });
  std::vector<double> l2(n), linf(n);
  for (Index i = 0; i < n; ++i) {
    l2[i] = error(rho[i], rho_ref, ErrorNorm::l2, dx);
    linf[i] = error(rho[i], rho_ref, ErrorNorm::linf);
  }
  return fit_study(dts, std::move(l2), std::move(linf));
}

StudyResult time_study_inflow(const DoubleButcherTableaud& tableau, double eps,
                              const std::vector<double>& dts, double ref_dt, const InflowScenario& sc) {
  const Index n = static_cast<Index>(dts.size());
  std::vector<VectorXd> rho(n);
  VectorXd rho_ref;
  const double dx = sc.domain_length / static_cast<double>(sc.n_x - 1);
  parallel_for(n + 1, [&](Index i) {
    if (i < n)
      rho[i] = run_inflow(tableau, eps, dts[static_cast<size_t>(i)], sc).rho;
    else
      rho_ref = run_inflow(tableau, eps, ref_dt, sc).rho;
  });
  std::vector<double> l2(n), linf(n);
  for (Index i = 0; i < n; ++i) {
    l2[i] = error(rho[i], rho_ref, ErrorNorm::l2, dx);
    linf[i] = error(rho[i], rho_ref, ErrorNorm::linf);
  }
  return fit_study(dts, std::move(l2), std::move(linf));
}

StudyResult space_study_periodic(const DoubleButcherTableaud& tableau, double eps,
                                 const std::vector<Index>& nxs, Index ref_nx, double dt,
                                 const PeriodicScenario& sc) {
  for (Index nx : nxs)
    if (ref_nx % nx != 0)
      throw std::invalid_argument("space study: reference grid must nest every coarse grid");
  const Index n = static_cast<Index>(nxs.size());
  std::vector<VectorXd> rho(n);
  VectorXd rho_ref;
  parallel_for(n + 1, [&](Index i) {
    PeriodicScenario s = sc;
    s.n_x = (i < n) ? nxs[static_cast<size_t>(i)] : ref_nx;
    VectorXd r = run_periodic(tableau, eps, dt, s).rho;
    if (i < n)
      rho[i] = std::move(r);
    else
      rho_ref = std::move(r);
  });
  std::vector<double> steps(n), l2(n), linf(n);
  for (Index i = 0; i < n; ++i) {
    const Index nx = nxs[static_cast<size_t>(i)];
    const Index stride = ref_nx / nx;
    VectorXd ref_coarse(nx);
    for (Index k = 0; k < nx; ++k) ref_coarse[k] = rho_ref[k * stride];
    const double dx = sc.domain_length / static_cast<double>(nx);
    steps[i] = dx;
    l2[i] = error(rho[i], ref_coarse, ErrorNorm::l2, dx);
    linf[i] = error(rho[i], ref_coarse, ErrorNorm::linf);
  }
  return fit_study(std::move(steps), std::move(l2), std::move(linf));
}

CompareOutput compare_periodic(const DoubleButcherTableaud& tableau, double eps, double dt,
                               const PeriodicScenario& sc, bool with_bgk, bool with_diffusion) {
  CompareOutput out;
  auto solver = make_periodic_solver(tableau, eps, dt, sc);
  out.x = solver.rho_nodes();
  auto state = make_initial(solver, sc);
  solver.run(state, sc.t_final);
  out.rho["micromacro"] = state.rho;

  if (with_bgk) {
    typename KineticSolver<double>::Config kc;
    kc.tableau = tableau;
    kc.eps = eps;
    kc.dt = dt;
    kc.n_x = sc.n_x;
    kc.domain_length = sc.domain_length;
    kc.boundary = KineticSolver<double>::Boundary::periodic;
    kc.upwind_order = sc.upwind_order;
    kc.drift = sc.drift;
    VelocityGridd grid = make_grid(sc.v_max, sc.n_v);
    KineticSolver<double> bgk(kc, grid, CollisionOperator<double>::bgk(grid));
    auto fstate = bgk.initial_state(named_profile(sc.profile),
                                    sc.data == InitialData::well_prepared ? eps * eps : 1.0);
    bgk.run(fstate, sc.t_final);
    out.rho["bgk"] = bgk.density(fstate);
  }

  if (with_diffusion) {
    const double kappa = solver.collision().kappa();
    VectorXd r = solver.rho_nodes().unaryExpr(named_profile(sc.profile));
    if (sc.drift == 0.0) {
      DiffusionDirk<double> diff(tableau, dt, kappa, solver.div_op(), solver.grad_op());
      diff.run(r, sc.t_final);
    } else {
      StencilMatrix<double> avg = sc.grid == SpatialGrid::staggered
                                      ? average_to_g<double>(sc.n_x)
                                      : StencilMatrix<double>::circulant({1.0}, 0, sc.n_x);
      AdvDiffLimit<double> lim(tableau, dt, kappa, sc.drift, solver.div_op(), solver.grad_op(), avg);
      lim.run(r, sc.t_final);
    }
    out.rho["diffusion"] = r;
  }
  return out;
}

// Profiles come back on the closed grid (boundary nodes included); the
// micro-macro and diffusion wall values are their boundary data.
CompareOutput compare_inflow(const DoubleButcherTableaud& tableau, double eps, double dt,
                             const InflowScenario& sc, bool with_bgk, bool with_diffusion) {
  CompareOutput out;
  auto solver = make_inflow_solver(tableau, eps, dt, sc);
  out.x = solver.closed_nodes();
  auto state = solver.initial_state();
  solver.run(state, sc.t_final);
  out.rho["micromacro"] = solver.closed_density(state);

  VelocityGridd grid = make_grid(sc.v_max, sc.n_v);
  auto collision = CollisionOperator<double>::bgk(grid);
  auto boundary = make_boundary(grid, sc.boundary);

  if (with_bgk) {
    typename KineticSolver<double>::Config kc;
    kc.tableau = tableau;
    kc.eps = eps;
    kc.dt = dt;
    kc.n_x = sc.n_x;
    kc.domain_length = sc.domain_length;
    kc.boundary = KineticSolver<double>::Boundary::inflow;
    KineticSolver<double> bgk(kc, grid, collision, boundary.f_left);
    KineticState<double> fstate;
    fstate.f = MatrixXd::Zero(sc.n_x, grid.size());
    bgk.run(fstate, sc.t_final);
    out.rho["bgk"] = bgk.density(fstate);
  }

  if (with_diffusion) {
    const double kappa = collision.kappa();
    double rho_left;
    if (boundary.policy == GhostPolicy::direct) {
      rho_left = half_bracket(grid, solver.half_set(), boundary.f_left);  // equilibrium Dirichlet value
    } else {
      rho_left = klar_boundary_rho(boundary.f_left, grid, kappa);
    }
    auto bnd = boundary_operators<double>(sc.n_x, solver.dx());
    VectorXd bvec = boundary_rho_vector(rho_left, 0.0, solver.dx(), sc.n_x);
    DiffusionDirk<double> diff(tableau, dt, kappa, bnd, bvec);
    VectorXd r = VectorXd::Zero(sc.n_x - 2);
    diff.run(r, sc.t_final);
    VectorXd closed(sc.n_x);
    closed[0] = rho_left;
    closed.segment(1, sc.n_x - 2) = r;
    closed[sc.n_x - 1] = 0.0;
    out.rho["diffusion"] = closed;
  }
  return out;
}

}  // namespace apmm
