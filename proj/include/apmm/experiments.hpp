#pragma once

// Experiment orchestration shared by the CLI and the acceptance suite:
// single runs, time/space convergence studies with self- or
// diffusion-reference, and the three-model comparisons.

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "apmm/advdiff.hpp"
#include "apmm/analysis.hpp"
#include "apmm/inflow.hpp"
#include "apmm/io.hpp"
#include "apmm/micromacro.hpp"
#include "apmm/reference.hpp"

namespace apmm {

enum class InitialData { well_prepared, non_well_prepared };

std::function<double(double)> named_profile(const std::string& name);

// Periodic test bench (defaults: domain [0,2pi], N_x=50, v_max=5, dv=1,
// third-order upwind with fourth-order central on the colocated grid).
struct PeriodicScenario {
  Index n_x = 50;
  double domain_length = 2 * EIGEN_PI;
  double v_max = 5;
  Index n_v = 10;
  SpatialGrid grid = SpatialGrid::colocated;
  int upwind_order = 3;
  int central_order = 4;
  double t_final = 0.5;
  InitialData data = InitialData::non_well_prepared;
  std::string profile = "1+cos";
  double drift = 0;  // advection-diffusion when nonzero
};

// Bounded inflow bench (defaults of the boundary experiments: domain [0,2],
// N_x=20, zero initial data, equilibrium inflow of strength 1 at the left).
struct InflowScenario {
  Index n_x = 20;
  double domain_length = 2;
  double v_max = 5;
  Index n_v = 10;
  double t_final = 0.1;
  std::string boundary = "equilibrium:1";  // or "scaled-velocity"
};

VelocityGridd make_grid(double v_max, Index n_v);
InflowBoundary<double> make_boundary(const VelocityGridd& grid, const std::string& spec);

struct RunOutput {
  VectorXd x;
  VectorXd rho;
  RunStats<double> stats;
};

RunOutput run_periodic(const DoubleButcherTableaud& tableau, double eps, double dt,
                       const PeriodicScenario& sc);
RunOutput run_inflow(const DoubleButcherTableaud& tableau, double eps, double dt, const InflowScenario& sc);

enum class TimeReference { self, diffusion };

struct StudyResult {
  std::vector<double> steps;  // dt or n_x
  std::vector<double> l2, linf;
  OrderFit<double> fit_l2, fit_linf;
};

StudyResult time_study_periodic(const DoubleButcherTableaud& tableau, double eps,
                                const std::vector<double>& dts, double ref_dt, const PeriodicScenario& sc,
                                TimeReference reference = TimeReference::self);

StudyResult time_study_inflow(const DoubleButcherTableaud& tableau, double eps,
                              const std::vector<double>& dts, double ref_dt, const InflowScenario& sc);

StudyResult space_study_periodic(const DoubleButcherTableaud& tableau, double eps,
                                 const std::vector<Index>& nxs, Index ref_nx, double dt,
                                 const PeriodicScenario& sc);

struct CompareOutput {
  VectorXd x;
  std::map<std::string, VectorXd> rho;  // keyed "micromacro", "bgk", "diffusion"
};

// Periodic three-model comparison; omits the kinetic run for eps below
// `bgk_eps_floor` where the non-AP reference is meaningless.
CompareOutput compare_periodic(const DoubleButcherTableaud& tableau, double eps, double dt,
                               const PeriodicScenario& sc, bool with_bgk, bool with_diffusion);

CompareOutput compare_inflow(const DoubleButcherTableaud& tableau, double eps, double dt,
                             const InflowScenario& sc, bool with_bgk, bool with_diffusion);

// Simple worker pool for independent sweep entries; results land by index.
void parallel_for(Index n, const std::function<void(Index)>& fn);

}  // namespace apmm
