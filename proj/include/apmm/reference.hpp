#pragma once

// Independent comparison solvers: an IMEX solver for the kinetic equation in
// the original f variable, DIRK solvers for the limiting diffusion and
// advection-diffusion equations, the displayed eps->0 limit map of the inflow
// scheme, and the Klar boundary value for the diffusion model under
// non-equilibrium inflow.
//
// These share the stencil and velocity-grid code with the main solver but not
// the micro-macro stage algebra, so cross-checks between the two are
// meaningful.

#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <stdexcept>
#include <vector>

#include "apmm/collision.hpp"
#include "apmm/stencil.hpp"
#include "apmm/tableau.hpp"
#include "apmm/types.hpp"
#include "apmm/velocity_grid.hpp"

namespace apmm {

template <typename Scalar>
struct KineticState {
  MatrixX<Scalar> f;  // N_x x N_v
  Scalar time = Scalar(0);
};

// IMEX BGK solver: transport (1/eps) v d_x f explicit upwind, collision
// (1/eps^2) L f implicit through the stage resolvents. Not AP in the strong
// sense; used as a kinetic reference at moderate eps.
template <typename Scalar>
class KineticSolver {
 public:
  enum class Boundary { periodic, inflow };

  struct Config {
    DoubleButcherTableau<Scalar> tableau;
    Scalar eps = Scalar(1);
    Scalar dt = Scalar(1e-3);
    Index n_x = 20;
    Scalar domain_length = Scalar(2) * Scalar(EIGEN_PI);
    Boundary boundary = Boundary::periodic;
    int upwind_order = 3;      // periodic only; the bounded variant is first order
    Scalar drift = Scalar(0);  // advection-diffusion collision operator when nonzero
  };

  KineticSolver(const Config& cfg, const VelocityGrid<Scalar>& grid, const CollisionOperator<Scalar>& collision,
                VectorX<Scalar> f_left = {})
      : cfg_(cfg), grid_(grid), collision_(collision), f_left_(std::move(f_left)) {
    if (!(cfg.eps > Scalar(0))) throw std::invalid_argument("kinetic: eps must be positive");
    if (!is_gsa(cfg.tableau)) throw std::invalid_argument("kinetic: a GSA tableau is required");
    periodic_ = cfg.boundary == Boundary::periodic;
    dx_ = periodic_ ? cfg.domain_length / Scalar(cfg.n_x) : cfg.domain_length / Scalar(cfg.n_x - 1);
    if (periodic_) {
      auto upw = upwind_pair<Scalar>(cfg.upwind_order, cfg.n_x, dx_);
      upwind_minus_ = std::make_unique<StencilMatrix<Scalar>>(upw.first);
      upwind_plus_ = std::make_unique<StencilMatrix<Scalar>>(upw.second);
    } else {
      // one-sided first-order differences; boundary rows are overwritten by the
      // pinned inflow values
      upwind_minus_ = std::make_unique<StencilMatrix<Scalar>>(
          StencilMatrix<Scalar>::band({Scalar(-1), Scalar(1)}, 1, cfg.n_x, cfg.n_x, Scalar(1) / dx_));
      upwind_plus_ = std::make_unique<StencilMatrix<Scalar>>(
          StencilMatrix<Scalar>::band({Scalar(-1), Scalar(1)}, 0, cfg.n_x, cfg.n_x, Scalar(1) / dx_));
      if (f_left_.size() != grid.size()) throw std::invalid_argument("kinetic inflow: f_left required");
    }
    const auto& v = grid.points();
    v_plus_ = (v + v.cwiseAbs()) / Scalar(2);
    v_minus_ = (v - v.cwiseAbs()) / Scalar(2);
    v_weight_ = v.cwiseProduct(grid.equilibrium());
    for (Index j = 0; j < cfg.tableau.stages; ++j) {
      const Scalar ajj = cfg.tableau.a_implicit(j, j);
      if (!resolvent_.count(ajj))
        resolvent_.emplace(ajj, std::make_shared<StageResolvent<Scalar>>(collision_, cfg.eps, ajj * cfg.dt));
    }
  }

  Scalar dx() const { return dx_; }
  VectorX<Scalar> nodes() const {
    VectorX<Scalar> x(cfg_.n_x);
    for (Index i = 0; i < cfg_.n_x; ++i) x[i] = Scalar(i) * dx_;
    return x;
  }

  KineticState<Scalar> initial_state(const std::function<Scalar(Scalar)>& rho0, Scalar micro_scale) const {
    // f = rho M + micro_scale (I-Pi)(v^2 M) rho, matching the micro-macro data
    KineticState<Scalar> st;
    VectorX<Scalar> rho = nodes().unaryExpr(rho0);
    VectorX<Scalar> v2M = grid_.points().cwiseAbs2().cwiseProduct(grid_.equilibrium());
    VectorX<Scalar> shape = v2M - bracket(grid_, v2M) * grid_.equilibrium();
    st.f = rho * grid_.equilibrium().transpose() + (micro_scale * rho) * shape.transpose();
    if (!periodic_) pin(st.f);
    return st;
  }

  VectorX<Scalar> density(const KineticState<Scalar>& st) const { return bracket_rows(grid_, st.f); }

  void step(KineticState<Scalar>& state) const {
    const auto& tab = cfg_.tableau;
    const auto& a = tab.a_implicit;
    const auto& ae = tab.a_explicit;
    const Index s = tab.stages;
    const Scalar eps = cfg_.eps, dt = cfg_.dt;
    std::vector<MatrixX<Scalar>> f_s(s), tf(s), lf(s);
    for (Index j = 0; j < s; ++j) {
      MatrixX<Scalar> b = eps * eps * state.f;
      for (Index k = 0; k < j; ++k) {
        if (ae(j, k) != Scalar(0)) b.noalias() -= (eps * ae(j, k) * dt) * tf[k];
        if (a(j, k) != Scalar(0)) b.noalias() += (a(j, k) * dt) * lf[k];
      }
      f_s[j] = resolvent_.at(a(j, j))->apply_rows(b);
      if (!periodic_) pin(f_s[j]);
      tf[j] = transport(f_s[j]);
      lf[j] = apply_collision(f_s[j]);
    }
    state.f = f_s[s - 1];
    state.time += dt;
  }

  void run(KineticState<Scalar>& state, Scalar t_final) const {
    const Index n = static_cast<Index>(std::llround((t_final - state.time) / cfg_.dt));
    for (Index i = 0; i < n; ++i) step(state);
  }

 private:
  MatrixX<Scalar> transport(const MatrixX<Scalar>& f) const {
    MatrixX<Scalar> t = upwind_minus_->apply(f) * v_plus_.asDiagonal();
    t.noalias() += upwind_plus_->apply(f) * v_minus_.asDiagonal();
    if (!periodic_) {
      // pinned rows do not evolve
      for (Index k = 0; k < grid_.size(); ++k) {
        if (grid_.points()[k] > Scalar(0)) t(0, k) = Scalar(0);
        if (grid_.points()[k] < Scalar(0)) t(cfg_.n_x - 1, k) = Scalar(0);
      }
    }
    return t;
  }

  MatrixX<Scalar> apply_collision(const MatrixX<Scalar>& f) const {
    MatrixX<Scalar> lf = collision_.apply_rows(f);
    if (cfg_.drift != Scalar(0))
      lf.noalias() += (cfg_.eps * cfg_.drift) * (bracket_rows(grid_, f) * v_weight_.transpose());
    return lf;
  }

  void pin(MatrixX<Scalar>& f) const {
    for (Index k = 0; k < grid_.size(); ++k) {
      if (grid_.points()[k] > Scalar(0)) f(0, k) = f_left_[k];
      if (grid_.points()[k] < Scalar(0)) f(cfg_.n_x - 1, k) = Scalar(0);
    }
  }

  Config cfg_;
  VelocityGrid<Scalar> grid_;
  CollisionOperator<Scalar> collision_;
  VectorX<Scalar> f_left_;
  bool periodic_ = true;
  Scalar dx_;
  std::unique_ptr<StencilMatrix<Scalar>> upwind_minus_, upwind_plus_;
  VectorX<Scalar> v_plus_, v_minus_, v_weight_;
  std::map<Scalar, std::shared_ptr<StageResolvent<Scalar>>> resolvent_;
};

// DIRK solver for rho_t = Div(kappa Grad rho) (+ boundary source on bounded
// domains) built on the composed first-derivative stencils, which is exactly
// the eps -> 0 limit of the micro-macro scheme on the same grid.
template <typename Scalar>
class DiffusionDirk {
 public:
  // Periodic constructor; div/grad are the two staggered-or-colocated stencils.
  DiffusionDirk(const DoubleButcherTableau<Scalar>& tableau, Scalar dt, Scalar kappa,
                const StencilMatrix<Scalar>& div, const StencilMatrix<Scalar>& grad)
      : tableau_(tableau), dt_(dt), kappa_(kappa) {
    op_ = kappa * (div.dense() * grad.dense());
    source_ = VectorX<Scalar>::Zero(op_.rows());
    factor();
  }

  // Bounded Dirichlet constructor; `boundary` is the assembled source vector
  // [-rho_b(0),0,..,rho_b(L)]/dx living on the half grid.
  DiffusionDirk(const DoubleButcherTableau<Scalar>& tableau, Scalar dt, Scalar kappa,
                const BoundaryOperators<Scalar>& bnd, const VectorX<Scalar>& boundary)
      : tableau_(tableau), dt_(dt), kappa_(kappa) {
    op_ = kappa * (bnd.div_to_rho.dense() * bnd.grad_to_g.dense());
    source_ = kappa * (bnd.div_to_rho.dense() * boundary);
    factor();
  }

  Scalar kappa() const { return kappa_; }

  void step(VectorX<Scalar>& rho) const {
    const auto& a = tableau_.a_implicit;
    const Index s = tableau_.stages;
    std::vector<VectorX<Scalar>> stage(s), rate(s);
    for (Index j = 0; j < s; ++j) {
      VectorX<Scalar> rhs = rho;
      for (Index k = 0; k < j; ++k)
        if (a(j, k) != Scalar(0)) rhs.noalias() += (a(j, k) * dt_) * rate[k];
      rhs.noalias() += (tableau_.c_implicit[j] * dt_) * source_;
      stage[j] = lu_.at(a(j, j))->solve(rhs);
      rate[j] = op_ * stage[j];
    }
    rho = stage[s - 1];
  }

  void run(VectorX<Scalar>& rho, Scalar t_span) const {
    const Index n = static_cast<Index>(std::llround(t_span / dt_));
    for (Index i = 0; i < n; ++i) step(rho);
  }

 private:
  void factor() {
    const Index n = op_.rows();
    for (Index j = 0; j < tableau_.stages; ++j) {
      const Scalar ajj = tableau_.a_implicit(j, j);
      if (lu_.count(ajj)) continue;
      auto lu = std::make_shared<Eigen::PartialPivLU<MatrixX<Scalar>>>(
          MatrixX<Scalar>(MatrixX<Scalar>::Identity(n, n) - (ajj * dt_) * op_));
      lu_.emplace(ajj, std::move(lu));
    }
  }

  DoubleButcherTableau<Scalar> tableau_;
  Scalar dt_, kappa_;
  MatrixX<Scalar> op_;
  VectorX<Scalar> source_;
  std::map<Scalar, std::shared_ptr<Eigen::PartialPivLU<MatrixX<Scalar>>>> lu_;
};

// IMEX solver for the limiting advection-diffusion equation
//   rho_t = kappa Lap rho - kappa A d_x rho:
// diffusion implicit with weights a_jk, advection explicit with weights
// ta_jk. On staggered grids the drift is averaged onto the half grid first.
template <typename Scalar>
class AdvDiffLimit {
 public:
  AdvDiffLimit(const DoubleButcherTableau<Scalar>& tableau, Scalar dt, Scalar kappa, Scalar drift,
               const StencilMatrix<Scalar>& div, const StencilMatrix<Scalar>& grad,
               const StencilMatrix<Scalar>& avg)
      : tableau_(tableau), dt_(dt) {
    diff_op_ = kappa * (div.dense() * grad.dense());
    adv_op_ = (kappa * drift) * (div.dense() * avg.dense());
    const Index n = diff_op_.rows();
    for (Index j = 0; j < tableau_.stages; ++j) {
      const Scalar ajj = tableau_.a_implicit(j, j);
      if (lu_.count(ajj)) continue;
      lu_.emplace(ajj, std::make_shared<Eigen::PartialPivLU<MatrixX<Scalar>>>(
                           MatrixX<Scalar>(MatrixX<Scalar>::Identity(n, n) - (ajj * dt_) * diff_op_)));
    }
  }

  void step(VectorX<Scalar>& rho) const {
    const auto& a = tableau_.a_implicit;
    const auto& ae = tableau_.a_explicit;
    const Index s = tableau_.stages;
    std::vector<VectorX<Scalar>> stage(s), diff(s), adv(s);
    for (Index j = 0; j < s; ++j) {
      VectorX<Scalar> rhs = rho;
      for (Index k = 0; k < j; ++k) {
        if (a(j, k) != Scalar(0)) rhs.noalias() += (a(j, k) * dt_) * diff[k];
        if (ae(j, k) != Scalar(0)) rhs.noalias() -= (ae(j, k) * dt_) * adv[k];
      }
      stage[j] = lu_.at(a(j, j))->solve(rhs);
      diff[j] = diff_op_ * stage[j];
      adv[j] = adv_op_ * stage[j];
    }
    rho = stage[s - 1];
  }

  void run(VectorX<Scalar>& rho, Scalar t_span) const {
    const Index n = static_cast<Index>(std::llround(t_span / dt_));
    for (Index i = 0; i < n; ++i) step(rho);
  }

 private:
  DoubleButcherTableau<Scalar> tableau_;
  Scalar dt_;
  MatrixX<Scalar> diff_op_, adv_op_;
  std::map<Scalar, std::shared_ptr<Eigen::PartialPivLU<MatrixX<Scalar>>>> lu_;
};

// One application of the displayed eps -> 0 limit of the first-order inflow
// scheme: rho_bar' = (I + dt Bcr(<v L~^{-1} J> Bcg))^{-1} (rho - dt Bcr(<v L~^{-1} J> rho_bd)).
template <typename Scalar>
VectorX<Scalar> inflow_limit_step(const VectorX<Scalar>& rho, Scalar dt, const VelocityGrid<Scalar>& grid,
                                  const HalfSet<Scalar>& hs, const CollisionOperator<Scalar>& collision,
                                  Index n_x, Scalar dx, Scalar rho_b_left, Scalar rho_b_right) {
  auto bnd = boundary_operators<Scalar>(n_x, dx);
  MatrixX<Scalar> ltilde = tilde_operator(collision, hs);
  VectorX<Scalar> jbar = grid.points().cwiseProduct(grid.equilibrium());
  jbar -= half_bracket(grid, hs, jbar) * grid.equilibrium();
  TildePseudoInverse<Scalar> linv(grid, hs, ltilde);
  const Scalar coeff = v_bracket(grid, linv.apply(jbar));  // <v (L~)^{-1} J> = -kappa
  MatrixX<Scalar> div = bnd.div_to_rho.dense();
  MatrixX<Scalar> grad = bnd.grad_to_g.dense();
  VectorX<Scalar> rho_bd = boundary_rho_vector(rho_b_left, rho_b_right, dx, n_x);
  const Index ni = n_x - 2;
  MatrixX<Scalar> sys = MatrixX<Scalar>::Identity(ni, ni) + (dt * coeff) * (div * grad);
  VectorX<Scalar> rhs = rho - (dt * coeff) * (div * rho_bd);
  return sys.partialPivLu().solve(rhs);
}

// Left boundary value for the diffusion model under non-equilibrium inflow,
// after Klar: half-range flux ratio plus the kappa-weighted v^2 correction.
template <typename Scalar>
Scalar klar_boundary_rho(const VectorX<Scalar>& f_b, const VelocityGrid<Scalar>& grid, Scalar kappa) {
  const auto& v = grid.points();
  const auto& M = grid.equilibrium();
  const Scalar dv = grid.dv();
  Scalar num = Scalar(0), den = Scalar(0);
  for (Index k = 0; k < grid.size(); ++k)
    if (v[k] > Scalar(0)) {
      num += v[k] * f_b[k] * dv;
      den += v[k] * M[k] * dv;
    }
  const Scalar ratio = num / den;
  Scalar corr = Scalar(0);
  for (Index k = 0; k < grid.size(); ++k)
    if (v[k] > Scalar(0)) corr += v[k] * v[k] * (f_b[k] - M[k] * ratio) * dv;
  return ratio + corr / (kappa * grid.equilibrium_mass());
}

}  // namespace apmm
