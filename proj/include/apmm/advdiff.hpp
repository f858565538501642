#pragma once

// Advection-diffusion variant of the micro-macro solver. The collision
// operator gains the drift term eps vM A <f>_V, which the scheme treats
// explicitly; it is stabilized by the implicit treatment of the stiff
// relaxation. With A = 0 the stage updates coincide with the plain solver
// exactly, term by term.
//
// In the limit eps -> 0 the scheme degenerates to an IMEX discretization of
// the advection-diffusion equation: diffusion implicit (weights a_jk),
// advection explicit (weights ta_jk), drift velocity kappa A. On staggered
// grids the drift source is averaged onto the g grid, which yields a central
// discretization of the limit advection term.

#include <cmath>
#include <stdexcept>

#include "apmm/micromacro.hpp"

namespace apmm {

template <typename Scalar>
struct DriftConfig {
  Scalar A = Scalar(0);

  void check(Scalar eps) const {
    if (std::abs(eps * A) >= Scalar(1))
      throw std::invalid_argument("drift config: |eps A| < 1 required");
  }
};

template <typename Scalar>
MicroMacroSolver<Scalar> make_advdiff_solver(const PeriodicConfig<Scalar>& cfg,
                                             const DriftConfig<Scalar>& drift,
                                             const VelocityGrid<Scalar>& grid,
                                             const CollisionOperator<Scalar>& collision) {
  drift.check(cfg.eps);
  return MicroMacroSolver<Scalar>(cfg, grid, collision, drift.A);
}

}  // namespace apmm
