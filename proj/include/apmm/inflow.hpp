#pragma once

// Half-moment micro-macro solver on a bounded domain with inflow boundary
// conditions. The decomposition f = rho_bar M + g_bar uses brackets over the
// incoming half V_- = {omega(v) < 0}, which makes the inflow data directly
// usable: rho_bar_b = <f_b>_{V_-} and g_bar_b = f_b - rho_bar_b M.
//
// Grid: x_i = i dx on [0, L] with dx = L/(N_x-1). rho and rho_bar live on the
// interior nodes i = 1..N_x-2, g_bar on the half nodes i+1/2 = 1/2..N_x-3/2,
// and g_bar_closed additionally carries one ghost layer on each side holding
// the boundary micro values. The interior macro unknown couples back through
// rho = rho_bar + B_avg <g_bar>_V.

#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <stdexcept>
#include <vector>

#include "apmm/collision.hpp"
#include "apmm/micromacro.hpp"
#include "apmm/stencil.hpp"
#include "apmm/tableau.hpp"
#include "apmm/types.hpp"
#include "apmm/velocity_grid.hpp"

namespace apmm {

template <typename Scalar>
struct InflowState {
  VectorX<Scalar> rho;       // N_x-2 interior values
  VectorX<Scalar> rho_bar;   // N_x-2 interior values
  MatrixX<Scalar> g_bar;     // (N_x-1) x N_v, zero V_- bracket per row
  MatrixX<Scalar> g_closed;  // (N_x+1) x N_v including ghost layers
  Scalar time = Scalar(0);
};

enum class GhostPolicy {
  direct,    // ghost = g_bar_b (equilibrium inflow: identically zero)
  mirrored,  // ghost = 2 (f_b - rho_bar_b M) - g_bar(first half cell)
};

template <typename Scalar>
struct InflowBoundary {
  VectorX<Scalar> f_left;  // inflow distribution at x=0; only V_- entries are used
  GhostPolicy policy = GhostPolicy::direct;

  static InflowBoundary equilibrium(const VelocityGrid<Scalar>& grid, Scalar value) {
    return {value * grid.equilibrium(), GhostPolicy::direct};
  }
  // f_b(v) = v M(v) on incoming velocities; the non-equilibrium test case.
  static InflowBoundary scaled_velocity(const VelocityGrid<Scalar>& grid) {
    return {grid.points().cwiseProduct(grid.equilibrium()), GhostPolicy::mirrored};
  }
  static InflowBoundary custom(VectorX<Scalar> values, GhostPolicy policy) {
    return {std::move(values), policy};
  }
};

// Ghost value of the non-equilibrium closure: the average of ghost and first
// interior half cell equals the boundary micro target f_b - rho_bar_b M.
template <typename Scalar>
VectorX<Scalar> nonequilibrium_ghost(const VelocityGrid<Scalar>& grid, const HalfSet<Scalar>& hs,
                                     const VectorX<Scalar>& f_b, Scalar rho_bar_b,
                                     const VectorX<Scalar>& g_first) {
  VectorX<Scalar> ghost = VectorX<Scalar>::Zero(grid.size());
  for (Index k = 0; k < grid.size(); ++k)
    if (hs.minus[k])
      ghost[k] = Scalar(2) * (f_b[k] - rho_bar_b * grid.equilibrium()[k]) - g_first[k];
  return ghost;
}

template <typename Scalar>
struct InflowConfig {
  DoubleButcherTableau<Scalar> tableau;
  Scalar eps = Scalar(1);
  Scalar dt = Scalar(1e-2);
  Index n_x = 20;
  Scalar domain_length = Scalar(2);
};

template <typename Scalar>
class InflowSolver {
 public:
  InflowSolver(const InflowConfig<Scalar>& cfg, const VelocityGrid<Scalar>& grid,
               const CollisionOperator<Scalar>& collision, const InflowBoundary<Scalar>& boundary)
      : cfg_(cfg), grid_(grid), half_(HalfSet<Scalar>::make(grid)), boundary_(boundary) {
    if (!(cfg.eps > Scalar(0))) throw std::invalid_argument("inflow: eps must be positive");
    if (!validate(cfg.tableau).empty()) throw std::invalid_argument("inflow: tableau fails validation");
    if (!is_gsa(cfg.tableau)) throw std::invalid_argument("inflow: a GSA tableau is required");

    dx_ = cfg.domain_length / Scalar(cfg.n_x - 1);
    bnd_ = boundary_operators<Scalar>(cfg.n_x, dx_);
    div_dense_ = bnd_.div_to_rho.dense();
    avg_dense_ = bnd_.avg_to_rho.dense();
    grad_dense_ = bnd_.grad_to_g.dense();

    ltilde_ = tilde_operator(collision, half_);
    jbar_ = grid.points().cwiseProduct(grid.equilibrium());
    jbar_ -= half_bracket(grid, half_, jbar_) * grid.equilibrium();  // (I - Pi^-)(vM)

    rho_b_left_ = half_bracket(grid, half_, boundary_.f_left);
    g_b_left_ = VectorX<Scalar>::Zero(grid.size());
    for (Index k = 0; k < grid.size(); ++k)
      if (half_.minus[k]) g_b_left_[k] = boundary_.f_left[k] - rho_b_left_ * grid.equilibrium()[k];
    rho_bd_ = boundary_rho_vector(rho_b_left_, Scalar(0), dx_, cfg.n_x);

    const auto& v = grid.points();
    v_plus_ = (v + v.cwiseAbs()) / Scalar(2);
    v_minus_ = (v - v.cwiseAbs()) / Scalar(2);

    const Index ni = cfg.n_x - 2;
    lap_dirichlet_ = div_dense_ * grad_dense_;        // (N_x-2)^2
    avg_grad_ = avg_dense_ * grad_dense_;             // (N_x-2)^2
    for (Index j = 0; j < cfg.tableau.stages; ++j) entry(cfg.tableau.a_implicit(j, j), ni);
    entry(Scalar(1), ni);  // first-order step uses the unit coefficient
  }

  const InflowConfig<Scalar>& config() const { return cfg_; }
  const VelocityGrid<Scalar>& grid() const { return grid_; }
  const HalfSet<Scalar>& half_set() const { return half_; }
  Scalar dx() const { return dx_; }
  Scalar rho_b_left() const { return rho_b_left_; }
  const VectorX<Scalar>& boundary_source() const { return rho_bd_; }
  const MatrixX<Scalar>& ltilde() const { return ltilde_; }
  const VectorX<Scalar>& jbar() const { return jbar_; }

  VectorX<Scalar> interior_nodes() const {
    VectorX<Scalar> x(cfg_.n_x - 2);
    for (Index i = 0; i < x.size(); ++i) x[i] = Scalar(i + 1) * dx_;
    return x;
  }
  VectorX<Scalar> closed_nodes() const {
    VectorX<Scalar> x(cfg_.n_x);
    for (Index i = 0; i < cfg_.n_x; ++i) x[i] = Scalar(i) * dx_;
    return x;
  }
  VectorX<Scalar> half_nodes() const {
    VectorX<Scalar> x(cfg_.n_x - 1);
    for (Index i = 0; i < x.size(); ++i) x[i] = (Scalar(i) + Scalar(0.5)) * dx_;
    return x;
  }

  InflowState<Scalar> initial_state(const std::function<Scalar(Scalar)>& rho0 = {}) const {
    InflowState<Scalar> st;
    st.rho_bar = rho0 ? VectorX<Scalar>(interior_nodes().unaryExpr(rho0))
                      : VectorX<Scalar>(VectorX<Scalar>::Zero(cfg_.n_x - 2));
    st.g_bar = MatrixX<Scalar>::Zero(cfg_.n_x - 1, grid_.size());
    st.g_closed = close(st.g_bar);
    st.rho = st.rho_bar + avg_dense_ * bracket_rows(grid_, st.g_bar);
    return st;
  }

  InflowState<Scalar> initial_state_with_g(const VectorX<Scalar>& rho_bar, const MatrixX<Scalar>& g_bar) const {
    InflowState<Scalar> st;
    st.rho_bar = rho_bar;
    st.g_bar = g_bar;
    st.g_closed = close(st.g_bar);
    st.rho = st.rho_bar + avg_dense_ * bracket_rows(grid_, st.g_bar);
    return st;
  }

  // Closes g_bar with ghost layers from the boundary data.
  MatrixX<Scalar> close(const MatrixX<Scalar>& g_bar) const {
    MatrixX<Scalar> cl = MatrixX<Scalar>::Zero(cfg_.n_x + 1, grid_.size());
    cl.middleRows(1, cfg_.n_x - 1) = g_bar;
    if (boundary_.policy == GhostPolicy::direct) {
      cl.row(0) = g_b_left_.transpose();
    } else {
      cl.row(0) =
          nonequilibrium_ghost(grid_, half_, boundary_.f_left, rho_b_left_, VectorX<Scalar>(g_bar.row(0)))
              .transpose();
    }
    // right boundary: zero inflow
    return cl;
  }

  // T_bar h = (I - Pi^-)((v+ B-_upw + v- B+_upw) h) on the closed micro field.
  MatrixX<Scalar> transport_term(const MatrixX<Scalar>& g_closed) const {
    MatrixX<Scalar> flux = bnd_.upwind_minus.apply(g_closed) * v_plus_.asDiagonal();
    flux.noalias() += bnd_.upwind_plus.apply(g_closed) * v_minus_.asDiagonal();
    return remove_equilibrium_rows_minus(grid_, half_, flux);
  }

  // One step of the first-order scheme: bounded elliptic solve for rho_bar,
  // explicit reconstruction of g_bar, ghost refresh, then rho.
  void step_first_order(InflowState<Scalar>& state) const {
    const Scalar eps = cfg_.eps, dt = cfg_.dt;
    const auto& e1 = *cache_.at(Scalar(1));
    MatrixX<Scalar> u2 = eps * eps * state.g_bar;
    u2.noalias() -= (eps * dt) * transport_term(state.g_closed);
    u2.noalias() -= (eps * dt) * (rho_bd_ * jbar_.transpose());
    MatrixX<Scalar> iu2 = e1.resolvent->apply_rows(u2);
    VectorX<Scalar> rhs = state.rho;
    rhs.noalias() -= avg_dense_ * bracket_rows(grid_, iu2);
    rhs.noalias() -= (dt / eps) * (div_dense_ * v_bracket_rows(grid_, iu2));
    VectorX<Scalar> rho_bar_new = e1.system.solve(rhs);
    MatrixX<Scalar> b = u2;
    b.noalias() -= (eps * dt) * ((grad_dense_ * rho_bar_new) * jbar_.transpose());
    state.g_bar = e1.resolvent->apply_rows(b);
    finish(state, rho_bar_new);
  }

  // Stage-form generalization; reduces to step_first_order under ARS(1,1,1).
  void step(InflowState<Scalar>& state, StageTrace<Scalar>* trace = nullptr) const {
    const auto& tab = cfg_.tableau;
    const auto& a = tab.a_implicit;
    const auto& ae = tab.a_explicit;
    const Index s = tab.stages;
    const Scalar eps = cfg_.eps, dt = cfg_.dt;

    std::vector<VectorX<Scalar>> rho_bar_s(s), vb(s);
    std::vector<MatrixX<Scalar>> g_s(s), gcl_s(s), tg(s), ltg(s);

    for (Index j = 0; j < s; ++j) {
      const Scalar ajj = a(j, j);
      const auto& ops = *cache_.at(ajj);
      const Scalar cj = tab.c_implicit[j];  // implicit row sum, weights the time-invariant source

      MatrixX<Scalar> w = eps * state.g_bar;
      for (Index k = 0; k < j; ++k) {
        if (ae(j, k) != Scalar(0)) w.noalias() -= (ae(j, k) * dt) * tg[k];
        if (a(j, k) != Scalar(0)) {
          w.noalias() -= (a(j, k) * dt) * ((grad_dense_ * rho_bar_s[k]) * jbar_.transpose());
          w.noalias() += (a(j, k) * dt / eps) * ltg[k];
        }
      }
      if (cj != Scalar(0)) w.noalias() -= (cj * dt) * (rho_bd_ * jbar_.transpose());

      VectorX<Scalar> rhs = state.rho;
      for (Index k = 0; k < j; ++k)
        if (a(j, k) != Scalar(0)) rhs.noalias() -= (a(j, k) * dt / eps) * (div_dense_ * vb[k]);

      if (ajj != Scalar(0)) {
        MatrixX<Scalar> iw = ops.resolvent->apply_rows(w);
        rhs.noalias() -= (ajj * dt) * (div_dense_ * v_bracket_rows(grid_, iw));
        rhs.noalias() -= eps * (avg_dense_ * bracket_rows(grid_, iw));
        rho_bar_s[j] = ops.system.solve(rhs);
        MatrixX<Scalar> b = eps * w;
        b.noalias() -= (eps * ajj * dt) * ((grad_dense_ * rho_bar_s[j]) * jbar_.transpose());
        g_s[j] = ops.resolvent->apply_rows(b);
      } else {
        g_s[j] = w / eps;
        rho_bar_s[j] = rhs - avg_dense_ * bracket_rows(grid_, g_s[j]);
      }

      gcl_s[j] = close(g_s[j]);
      vb[j] = v_bracket_rows(grid_, g_s[j]);
      tg[j] = transport_term(gcl_s[j]);
      ltg[j] = g_s[j] * ltilde_.transpose();
    }

    state.g_bar = g_s[s - 1];
    finish(state, rho_bar_s[s - 1]);
    if (trace) {
      trace->rho = std::move(rho_bar_s);
      trace->g = std::move(g_s);
    }
  }

  RunStats<Scalar> run(InflowState<Scalar>& state, Scalar t_final,
                       const std::function<void(const InflowState<Scalar>&, Index)>& snapshot = {},
                       Index snapshot_every = 0) const {
    RunStats<Scalar> stats;
    const Scalar span = t_final - state.time;
    if (span < Scalar(0)) throw std::invalid_argument("inflow run: t_final before current time");
    const Index n_steps = static_cast<Index>(std::llround(span / cfg_.dt));
    stats.t_final_snapped = std::abs(Scalar(n_steps) * cfg_.dt - span) > Scalar(1e-9) * std::max(span, cfg_.dt);
    if (snapshot) snapshot(state, 0);
    for (Index i = 1; i <= n_steps; ++i) {
      step(state);
      stats.max_g_bracket = std::max(
          stats.max_g_bracket, half_bracket_rows(grid_, half_, state.g_bar).cwiseAbs().maxCoeff());
      if (snapshot && ((snapshot_every > 0 && i % snapshot_every == 0) || i == n_steps)) snapshot(state, i);
    }
    stats.steps = n_steps;
    return stats;
  }

  // Density on the closed grid including the boundary nodes, where
  // rho = rho_bar_b + <g_bar> with g_bar averaged onto the node. At the wall
  // this exposes the half-moment boundary value, which is where the boundary
  // layer shows against the diffusion profile.
  VectorX<Scalar> closed_density(const InflowState<Scalar>& state) const {
    VectorX<Scalar> rho(cfg_.n_x);
    rho.segment(1, cfg_.n_x - 2) = state.rho;
    VectorX<Scalar> left = (state.g_closed.row(0) + state.g_closed.row(1)).transpose() / Scalar(2);
    VectorX<Scalar> right =
        (state.g_closed.row(cfg_.n_x - 1) + state.g_closed.row(cfg_.n_x)).transpose() / Scalar(2);
    rho[0] = rho_b_left_ + bracket(grid_, left);
    rho[cfg_.n_x - 1] = Scalar(0) + bracket(grid_, right);
    return rho;
  }

  // Free-streaming reach of the fastest particles; used by the harness to warn
  // when a kinetic-regime run would touch the right boundary.
  bool signal_reaches_right_boundary(Scalar t_final) const {
    return cfg_.eps >= Scalar(0.5) && t_final * grid_.v_max() / cfg_.eps > cfg_.domain_length;
  }

 private:
  struct StageOps {
    std::unique_ptr<StageResolvent<Scalar>> resolvent;  // built on L~
    Scalar d = Scalar(0);                               // <v I_j J>
    Scalar e = Scalar(0);                               // <I_j J>
    Eigen::PartialPivLU<MatrixX<Scalar>> system;
  };

  const StageOps& entry(Scalar ajj, Index ni) {
    auto it = cache_.find(ajj);
    if (it != cache_.end()) return *it->second;
    auto ops = std::make_shared<StageOps>();
    ops->resolvent = std::make_unique<StageResolvent<Scalar>>(ltilde_, cfg_.eps, ajj * cfg_.dt);
    VectorX<Scalar> ij = ops->resolvent->apply(jbar_);
    ops->d = v_bracket(grid_, ij);
    ops->e = bracket(grid_, ij);
    const Scalar coef = ajj * cfg_.dt;
    MatrixX<Scalar> sys = MatrixX<Scalar>::Identity(ni, ni) - (coef * coef * ops->d) * lap_dirichlet_ -
                          (cfg_.eps * coef * ops->e) * avg_grad_;
    ops->system.compute(sys);
    return *cache_.emplace(ajj, std::move(ops)).first->second;
  }

  void finish(InflowState<Scalar>& state, VectorX<Scalar> rho_bar_new) const {
    state.rho_bar = std::move(rho_bar_new);
    state.g_closed = close(state.g_bar);
    state.rho = state.rho_bar + avg_dense_ * bracket_rows(grid_, state.g_bar);
    state.time += cfg_.dt;
  }

  InflowConfig<Scalar> cfg_;
  VelocityGrid<Scalar> grid_;
  HalfSet<Scalar> half_;
  InflowBoundary<Scalar> boundary_;
  Scalar dx_;
  BoundaryOperators<Scalar> bnd_;
  MatrixX<Scalar> div_dense_, avg_dense_, grad_dense_, lap_dirichlet_, avg_grad_;
  MatrixX<Scalar> ltilde_;
  VectorX<Scalar> jbar_, rho_bd_, v_plus_, v_minus_, g_b_left_;
  Scalar rho_b_left_ = Scalar(0);
  std::map<Scalar, std::shared_ptr<StageOps>> cache_;
};

}  // namespace apmm
