// Command-line front end: single runs and sweeps, time/space convergence
// studies, model comparisons, and the acceptance suite.
//
// Exit codes: 0 success, 1 configuration error, 2 solver failure,
// 3 acceptance-threshold failure in check mode.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "CLI11.hpp"
#include "apmm/acceptance.hpp"
#include "apmm/experiments.hpp"
#include "apmm/io.hpp"

namespace {

using namespace apmm;

struct CliSettings {
  std::string config_path;
  std::string model = "micromacro";
  std::string tableau = "DP1_A242";
  std::string tableau_file;
  std::vector<double> eps = {1e-4};
  std::vector<double> dt = {0.005};
  std::vector<long> nx;
  double t_final = -1;
  double domain_length = -1;
  double v_max = 5;
  long n_v = 10;
  std::string grid = "colocated";
  long upwind_order = 3;
  long central_order = 4;
  std::string data = "nwp";
  std::string profile = "1+cos";
  double drift = 0.5;
  std::string boundary = "equilibrium:1";
  std::string outdir = ".";
  long snapshot_every = 0;
  double ref_dt = 1e-4;
  long ref_nx = 120;
  std::string reference = "self";
  std::vector<std::string> schemes;
  bool plot = false;
  std::string filter;
};

// Config file values fill in any option the command line left untouched.
void apply_config(const CLI::App& app, CliSettings& s) {
  if (s.config_path.empty()) return;
  KeyValueFile kv = KeyValueFile::load(s.config_path);
  auto fresh = [&](const std::string& flag) {
    auto* opt = app.get_option_no_throw("--" + flag);
    return opt == nullptr || opt->count() == 0;
  };
  if (kv.has("model") && fresh("model")) s.model = kv.get("model");
  if (kv.has("tableau") && fresh("tableau")) s.tableau = kv.get("tableau");
  if (kv.has("tableau_file") && fresh("tableau-file")) s.tableau_file = kv.get("tableau_file");
  if (kv.has("eps") && fresh("eps")) s.eps = kv.get_list("eps");
  if (kv.has("dt") && fresh("dt")) s.dt = kv.get_list("dt");
  if (kv.has("nx") && fresh("nx")) {
    s.nx.clear();
    for (double v : kv.get_list("nx")) s.nx.push_back(static_cast<long>(v));
  }
  if (kv.has("T") && fresh("T")) s.t_final = kv.get_double("T");
  if (kv.has("domain_length") && fresh("domain-length")) s.domain_length = kv.get_double("domain_length");
  if (kv.has("vmax") && fresh("vmax")) s.v_max = kv.get_double("vmax");
  if (kv.has("nv") && fresh("nv")) s.n_v = kv.get_int("nv");
  if (kv.has("grid") && fresh("grid")) s.grid = kv.get("grid");
  if (kv.has("upwind_order") && fresh("upwind-order")) s.upwind_order = kv.get_int("upwind_order");
  if (kv.has("central_order") && fresh("central-order")) s.central_order = kv.get_int("central_order");
  if (kv.has("data") && fresh("data")) s.data = kv.get("data");
  if (kv.has("profile") && fresh("profile")) s.profile = kv.get("profile");
  if (kv.has("drift") && fresh("drift")) s.drift = kv.get_double("drift");
  if (kv.has("boundary") && fresh("boundary")) s.boundary = kv.get("boundary");
  if (kv.has("outdir") && fresh("outdir")) s.outdir = kv.get("outdir");
  if (kv.has("snapshot_every") && fresh("snapshot-every")) s.snapshot_every = kv.get_int("snapshot_every");
  if (kv.has("ref_dt") && fresh("ref-dt")) s.ref_dt = kv.get_double("ref_dt");
  if (kv.has("ref_nx") && fresh("ref-nx")) s.ref_nx = kv.get_int("ref_nx");
  if (kv.has("reference") && fresh("reference")) s.reference = kv.get("reference");
  if (kv.has("schemes") && fresh("schemes")) {
    s.schemes.clear();
    std::string list = kv.get("schemes");
    std::replace(list.begin(), list.end(), ',', ' ');
    std::istringstream is(list);
    std::string tok;
    while (is >> tok) s.schemes.push_back(tok);
  }
}

DoubleButcherTableaud resolve_tableau(const CliSettings& s, const std::string& name) {
  if (!s.tableau_file.empty()) {
    auto t = load_tableau(s.tableau_file);
    auto bad = validate(t);
    if (!bad.empty()) {
      std::string msg = "tableau file fails validation:";
      for (auto& b : bad) msg += "\n  " + b;
      throw std::invalid_argument(msg);
    }
    return t;
  }
  return builtin_tableau<double>(name);
}

InitialData parse_data(const std::string& s) {
  if (s == "wp") return InitialData::well_prepared;
  if (s == "nwp") return InitialData::non_well_prepared;
  throw std::invalid_argument("data must be 'wp' or 'nwp'");
}

PeriodicScenario periodic_scenario(const CliSettings& s, double drift) {
  PeriodicScenario sc;
  if (!s.nx.empty()) sc.n_x = s.nx.front();
  if (s.domain_length > 0) sc.domain_length = s.domain_length;
  sc.v_max = s.v_max;
  sc.n_v = s.n_v;
  sc.grid = s.grid == "staggered" ? SpatialGrid::staggered : SpatialGrid::colocated;
  sc.upwind_order = static_cast<int>(s.upwind_order);
  sc.central_order = static_cast<int>(s.central_order);
  if (s.t_final > 0) sc.t_final = s.t_final;
  sc.data = parse_data(s.data);
  sc.profile = s.profile;
  sc.drift = drift;
  return sc;
}

InflowScenario inflow_scenario(const CliSettings& s) {
  InflowScenario sc;
  if (!s.nx.empty()) sc.n_x = s.nx.front();
  if (s.domain_length > 0) sc.domain_length = s.domain_length;
  sc.v_max = s.v_max;
  sc.n_v = s.n_v;
  if (s.t_final > 0) sc.t_final = s.t_final;
  sc.boundary = s.boundary;
  return sc;
}

std::vector<std::pair<std::string, std::string>> metadata(const CliSettings& s, double eps, double dt,
                                                          long nx) {
  return {{"model", s.model},
          {"tableau", s.tableau},
          {"eps", format_double(eps)},
          {"dt", format_double(dt)},
          {"nx", std::to_string(nx)},
          {"T", format_double(s.t_final)},
          {"domain_length",
           format_double(s.domain_length > 0 ? s.domain_length : (s.model == "inflow" ? 2.0 : 2 * EIGEN_PI))},
          {"vmax", format_double(s.v_max)},
          {"nv", std::to_string(s.n_v)},
          {"grid", s.grid},
          {"upwind_order", std::to_string(s.upwind_order)},
          {"central_order", std::to_string(s.central_order)},
          {"data", s.data},
          {"profile", s.profile},
          {"boundary", s.boundary},
          {"drift", format_double(s.drift)}};
}

std::string out_path(const CliSettings& s, const std::string& stem) {
  std::filesystem::create_directories(s.outdir);
  return (std::filesystem::path(s.outdir) / stem).string();
}

int cmd_run(const CliSettings& s) {
  std::vector<std::tuple<double, double, long>> sweep;
  std::vector<long> nxs = s.nx;
  if (nxs.empty()) nxs.push_back(s.model == "inflow" ? 20 : 50);
  for (double eps : s.eps)
    for (double dt : s.dt)
      for (long nx : nxs) sweep.emplace_back(eps, dt, nx);

  parallel_for(static_cast<Index>(sweep.size()), [&](Index i) {
    auto [eps, dt, nx] = sweep[static_cast<size_t>(i)];
    CliSettings local = s;
    local.nx = {nx};
    if (local.t_final <= 0) local.t_final = s.model == "inflow" ? 0.1 : 0.5;
    std::ostringstream stem;
    stem << "run_" << s.model << "_eps" << eps << "_dt" << dt << "_nx" << nx << ".csv";
    SnapshotWriter writer(out_path(s, stem.str()), metadata(local, eps, dt, nx));
    auto tab = resolve_tableau(s, s.tableau);

    if (s.model == "inflow") {
      InflowScenario sc = inflow_scenario(local);
      auto grid = make_grid(sc.v_max, sc.n_v);
      auto collision = CollisionOperator<double>::bgk(grid);
      InflowConfig<double> cfg{tab, eps, dt, sc.n_x, sc.domain_length};
      InflowSolver<double> solver(cfg, grid, collision, make_boundary(grid, sc.boundary));
      if (solver.signal_reaches_right_boundary(sc.t_final))
        std::fprintf(stderr, "warning: free-streaming signal reaches the right boundary before T\n");
      auto state = solver.initial_state();
      VectorXd x = solver.interior_nodes();
      solver.run(
          state, sc.t_final,
          [&](const InflowState<double>& st, Index) {
            for (Index k = 0; k < x.size(); ++k) writer.row(st.time, k, x[k], st.rho[k]);
          },
          s.snapshot_every);
      return;
    }

    if (s.model == "micromacro" || s.model == "advdiff") {
      PeriodicScenario sc = periodic_scenario(local, s.model == "advdiff" ? s.drift : 0.0);
      PeriodicConfig<double> cfg{tab, eps, dt, sc.n_x, sc.domain_length, sc.grid, sc.upwind_order,
                                 sc.central_order};
      auto grid = make_grid(sc.v_max, sc.n_v);
      auto collision = CollisionOperator<double>::bgk(grid);
      MicroMacroSolverd solver(cfg, grid, collision, sc.drift);
      auto state = sc.data == InitialData::well_prepared
                       ? solver.init_well_prepared(named_profile(sc.profile))
                       : solver.init_non_well_prepared(named_profile(sc.profile));
      VectorXd x = solver.rho_nodes();
      auto stats = solver.run(
          state, sc.t_final,
          [&](const MicroMacroState<double>& st, Index) {
            for (Index k = 0; k < x.size(); ++k) writer.row(st.time, k, x[k], st.rho[k]);
          },
          s.snapshot_every);
      if (stats.t_final_snapped) std::fprintf(stderr, "warning: T snapped to a whole number of steps\n");
      return;
    }

    if (s.model == "bgk") {
      PeriodicScenario sc = periodic_scenario(local, 0.0);
      typename KineticSolver<double>::Config cfg;
      cfg.tableau = tab;
      cfg.eps = eps;
      cfg.dt = dt;
      cfg.n_x = sc.n_x;
      cfg.domain_length = sc.domain_length;
      cfg.upwind_order = sc.upwind_order;
      auto grid = make_grid(sc.v_max, sc.n_v);
      KineticSolver<double> solver(cfg, grid, CollisionOperator<double>::bgk(grid));
      auto state = solver.initial_state(named_profile(sc.profile),
                                        sc.data == InitialData::well_prepared ? eps * eps : 1.0);
      VectorXd x = solver.nodes();
      const Index steps = static_cast<Index>(std::llround(sc.t_final / dt));
      auto emit = [&]() {
        VectorXd rho = solver.density(state);
        for (Index k = 0; k < x.size(); ++k) writer.row(state.time, k, x[k], rho[k]);
      };
      emit();
      for (Index step = 1; step <= steps; ++step) {
        solver.step(state);
        if ((s.snapshot_every > 0 && step % s.snapshot_every == 0) || step == steps) emit();
      }
      return;
    }

    if (s.model == "diffusion" || s.model == "advdiff-limit") {
      PeriodicScenario sc = periodic_scenario(local, s.model == "diffusion" ? 0.0 : s.drift);
      auto grid = make_grid(sc.v_max, sc.n_v);
      auto collision = CollisionOperator<double>::bgk(grid);
      const double dx = sc.domain_length / static_cast<double>(sc.n_x);
      StencilMatrix<double> div = sc.grid == SpatialGrid::staggered
                                      ? central_div_to_rho<double>(sc.n_x, dx)
                                      : central_colocated<double>(sc.central_order, sc.n_x, dx);
      StencilMatrix<double> grad = sc.grid == SpatialGrid::staggered
                                       ? central_grad_to_g<double>(sc.n_x, dx)
                                       : div;
      VectorXd rho(sc.n_x);
      for (Index k = 0; k < sc.n_x; ++k) rho[k] = named_profile(sc.profile)(k * dx);
      const Index steps = static_cast<Index>(std::llround(sc.t_final / dt));
      auto emit = [&](double t) {
        for (Index k = 0; k < sc.n_x; ++k) writer.row(t, k, k * dx, rho[k]);
      };
      emit(0.0);
      if (s.model == "diffusion") {
        DiffusionDirk<double> solver(tab, dt, collision.kappa(), div, grad);
        for (Index step = 1; step <= steps; ++step) {
          solver.step(rho);
          if ((s.snapshot_every > 0 && step % s.snapshot_every == 0) || step == steps) emit(step * dt);
        }
      } else {
        StencilMatrix<double> avg = sc.grid == SpatialGrid::staggered
                                        ? average_to_g<double>(sc.n_x)
                                        : StencilMatrix<double>::circulant({1.0}, 0, sc.n_x);
        AdvDiffLimit<double> solver(tab, dt, collision.kappa(), sc.drift, div, grad, avg);
        for (Index step = 1; step <= steps; ++step) {
          solver.step(rho);
          if ((s.snapshot_every > 0 && step % s.snapshot_every == 0) || step == steps) emit(step * dt);
        }
      }
      return;
    }

    throw std::invalid_argument("unknown model '" + s.model +
                                "' (micromacro, advdiff, inflow, bgk, diffusion, advdiff-limit)");
  });
  return 0;
}

int cmd_convergence_time(const CliSettings& s) {
  if (s.dt.size() < 3) throw std::invalid_argument("convergence-time: need at least 3 dt values");
  std::vector<std::string> schemes = s.schemes.empty() ? std::vector<std::string>{s.tableau} : s.schemes;
  std::vector<ConvergenceRow> rows;
  std::vector<PlotSeries> series;
  for (const auto& scheme : schemes) {
    auto tab = resolve_tableau(s, scheme);
    for (double eps : s.eps) {
      StudyResult r;
      if (s.model == "inflow") {
        CliSettings local = s;
        r = time_study_inflow(tab, eps, s.dt, s.ref_dt, inflow_scenario(local));
      } else {
        CliSettings local = s;
        PeriodicScenario sc = periodic_scenario(local, s.model == "advdiff" ? s.drift : 0.0);
        r = time_study_periodic(tab, eps, s.dt, s.ref_dt, sc,
                                s.reference == "diffusion" ? TimeReference::diffusion
                                                           : TimeReference::self);
      }
      for (size_t i = 0; i < r.steps.size(); ++i)
        rows.push_back({scheme, eps, r.steps[i], r.l2[i], r.linf[i], r.fit_l2.slope});
      std::printf("%s eps=%g: L2 slope %.3f (Linf slope %.3f)\n", scheme.c_str(), eps, r.fit_l2.slope,
                  r.fit_linf.slope);
      series.push_back({scheme + " eps=" + format_double(eps), r.steps, r.l2});
    }
  }
  write_convergence_csv(out_path(s, "convergence_time.csv"), "dt", rows);
  if (s.plot) write_svg_plot(out_path(s, "convergence_time.svg"), "time convergence", series, true);
  return 0;
}

int cmd_convergence_space(const CliSettings& s) {
  std::vector<long> nxs = s.nx.empty() ? std::vector<long>{20, 24, 30, 40, 60} : s.nx;
  std::vector<std::string> schemes = s.schemes.empty() ? std::vector<std::string>{s.tableau} : s.schemes;
  std::vector<ConvergenceRow> rows;
  std::vector<PlotSeries> series;
  std::vector<Index> nxs_i(nxs.begin(), nxs.end());
  for (const auto& scheme : schemes) {
    auto tab = resolve_tableau(s, scheme);
    for (double eps : s.eps) {
      CliSettings local = s;
      PeriodicScenario sc = periodic_scenario(local, s.model == "advdiff" ? s.drift : 0.0);
      if (s.t_final <= 0) sc.t_final = 0.01;
      StudyResult r = space_study_periodic(tab, eps, nxs_i, s.ref_nx, s.dt.front(), sc);
      for (size_t i = 0; i < r.steps.size(); ++i)
        rows.push_back({scheme, eps, static_cast<double>(nxs[i]), r.l2[i], r.linf[i], r.fit_l2.slope});
      std::printf("%s eps=%g: L2 slope %.3f (Linf slope %.3f)\n", scheme.c_str(), eps, r.fit_l2.slope,
                  r.fit_linf.slope);
      series.push_back({scheme + " eps=" + format_double(eps), r.steps, r.l2});
    }
  }
  write_convergence_csv(out_path(s, "convergence_space.csv"), "n_x", rows);
  if (s.plot) write_svg_plot(out_path(s, "convergence_space.svg"), "space convergence", series, true);
  return 0;
}

int cmd_compare(const CliSettings& s) {
  auto tab = resolve_tableau(s, s.tableau);
  CliSettings local = s;
  if (local.t_final <= 0) local.t_final = s.model == "inflow" ? 0.1 : 0.5;
  for (double eps : s.eps) {
    CompareOutput cmp;
    const bool with_bgk = eps >= 0.01;  // the kinetic reference is meaningless deep in the diffusive regime
    if (s.model == "inflow") {
      cmp = compare_inflow(tab, eps, s.dt.front(), inflow_scenario(local), with_bgk, true);
    } else {
      cmp = compare_periodic(tab, eps, s.dt.front(), periodic_scenario(local, 0.0), with_bgk, true);
    }
    std::vector<PlotSeries> series;
    for (const auto& [name, rho] : cmp.rho) {
      std::ostringstream stem;
      stem << "compare_" << s.model << "_" << name << "_eps" << eps << ".csv";
      SnapshotWriter writer(out_path(s, stem.str()), metadata(local, eps, s.dt.front(),
                                                              s.nx.empty() ? 0 : s.nx.front()));
      for (Index k = 0; k < cmp.x.size(); ++k) writer.row(local.t_final, k, cmp.x[k], rho[k]);
      PlotSeries ps{name, {}, {}};
      for (Index k = 0; k < cmp.x.size(); ++k) {
        ps.x.push_back(cmp.x[k]);
        ps.y.push_back(rho[k]);
      }
      series.push_back(std::move(ps));
    }
    if (s.plot)
      write_svg_plot(out_path(s, "compare_" + s.model + "_eps" + format_double(eps) + ".svg"),
                     "density comparison", series, false);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"asymptotic-preserving IMEX micro-macro solver harness"};
  app.require_subcommand(1);
  CliSettings s;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", s.config_path, "key=value config file");
    cmd->add_option("--model", s.model, "micromacro|advdiff|inflow|bgk|diffusion|advdiff-limit");
    cmd->add_option("--tableau", s.tableau, "builtin tableau name");
    cmd->add_option("--tableau-file", s.tableau_file, "user tableau file");
    cmd->add_option("--eps", s.eps, "scaling parameter list");
    cmd->add_option("--dt", s.dt, "time step list");
    cmd->add_option("--nx", s.nx, "spatial resolution list");
    cmd->add_option("--T", s.t_final, "final time");
    cmd->add_option("--domain-length", s.domain_length, "domain length");
    cmd->add_option("--vmax", s.v_max, "velocity truncation");
    cmd->add_option("--nv", s.n_v, "number of velocity points");
    cmd->add_option("--grid", s.grid, "staggered|colocated");
    cmd->add_option("--upwind-order", s.upwind_order, "1 or 3");
    cmd->add_option("--central-order", s.central_order, "2 or 4");
    cmd->add_option("--data", s.data, "wp|nwp initial data");
    cmd->add_option("--profile", s.profile, "initial density profile");
    cmd->add_option("--drift", s.drift, "advection coefficient A");
    cmd->add_option("--boundary", s.boundary, "equilibrium:<v>|scaled-velocity|table:<path>[:policy]");
    cmd->add_option("--outdir", s.outdir, "output directory");
    cmd->add_option("--snapshot-every", s.snapshot_every, "steps between snapshots (0: final only)");
    cmd->add_option("--ref-dt", s.ref_dt, "reference time step");
    cmd->add_option("--ref-nx", s.ref_nx, "reference spatial resolution");
    cmd->add_option("--reference", s.reference, "self|diffusion");
    cmd->add_option("--schemes", s.schemes, "tableau names for studies");
    cmd->add_flag("--plot", s.plot, "emit SVG plots next to the CSVs");
  };

  auto* run = app.add_subcommand("run", "run a model and write snapshot CSVs");
  add_common(run);
  auto* conv_t = app.add_subcommand("convergence-time", "time-order study");
  add_common(conv_t);
  auto* conv_s = app.add_subcommand("convergence-space", "space-order study");
  add_common(conv_s);
  auto* cmp = app.add_subcommand("compare", "micro-macro vs kinetic vs diffusion profiles");
  add_common(cmp);
  auto* check = app.add_subcommand("check", "run the acceptance suite");
  check->add_option("--filter", s.filter, "criterion tag substring, e.g. C7");

  CLI11_PARSE(app, argc, argv);

  try {
    CLI::App* active = app.get_subcommands().front();
    apply_config(*active, s);
    if (active == run) return cmd_run(s);
    if (active == conv_t) return cmd_convergence_time(s);
    if (active == conv_s) return cmd_convergence_space(s);
    if (active == cmp) return cmd_compare(s);
    if (active == check) {
      auto results = run_acceptance(s.filter);
      return report_acceptance(results) ? 0 : 3;
    }
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "solver failure: %s\n", e.what());
    return 2;
  }
  return 0;
}
