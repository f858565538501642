#pragma once

// High-order IMEX-RK solver for the micro-macro system in the diffusive
// scaling with periodic boundary conditions.
//
// Per stage j the density solves the elliptic system
//   (I - a_jj^2 dt^2 Div(D_j Grad)) rho_j = rho_n - sum_{k<j} a_jk (dt/eps) Div<v g_k>
//                                         - a_jj dt Div<v I_j W>,
// with W = eps g_n - sum_{k<j} ta_jk dt T g_k - sum_{k<j} a_jk dt vM Grad rho_k
//        + (1/eps) sum_{k<j} a_jk dt L g_k  [+ drift terms],
// and the micro part follows as g_j = I_j (eps W - eps a_jj dt vM Grad rho_j).
// I_j = (eps^2 I - a_jj dt L)^{-1}. The composed operator Div(D Grad) is always
// the matrix product of the two first-derivative stencils; an independent
// Laplacian stencil breaks the RK stage structure and drops the order in time.

#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "apmm/collision.hpp"
#include "apmm/stencil.hpp"
#include "apmm/tableau.hpp"
#include "apmm/types.hpp"
#include "apmm/velocity_grid.hpp"

namespace apmm {

template <typename Scalar>
struct MicroMacroState {
  VectorX<Scalar> rho;  // N_x
  MatrixX<Scalar> g;    // N_x x N_v, zero bracket per row
  Scalar time = Scalar(0);
};

template <typename Scalar>
struct PeriodicConfig {
  DoubleButcherTableau<Scalar> tableau;
  Scalar eps = Scalar(1);
  Scalar dt = Scalar(1e-2);
  Index n_x = 50;
  Scalar domain_length = Scalar(2) * Scalar(EIGEN_PI);
  SpatialGrid grid = SpatialGrid::colocated;
  int upwind_order = 3;   // 1 or 3
  int central_order = 4;  // 2 or 4; staggered grids use the two-point forms
};

template <typename Scalar>
struct RunStats {
  Index steps = 0;
  Scalar max_g_bracket = Scalar(0);  // max over the run of max_x |<g>_V|
  Scalar mass_drift = Scalar(0);     // |sum rho - sum rho_0| / |sum rho_0|
  bool t_final_snapped = false;
};

// Optional per-step record of the internal stage values (diagnostics/tests).
template <typename Scalar>
struct StageTrace {
  std::vector<VectorX<Scalar>> rho;
  std::vector<MatrixX<Scalar>> g;
};

template <typename Scalar>
class MicroMacroSolver {
 public:
  MicroMacroSolver(const PeriodicConfig<Scalar>& cfg, const VelocityGrid<Scalar>& grid,
                   const CollisionOperator<Scalar>& collision, Scalar drift = Scalar(0))
      : cfg_(cfg), grid_(grid), collision_(collision), drift_(drift) {
    if (!(cfg.eps > Scalar(0))) throw std::invalid_argument("micromacro: eps must be positive");
    if (!(cfg.dt > Scalar(0))) throw std::invalid_argument("micromacro: dt must be positive");
    if (!validate(cfg.tableau).empty()) throw std::invalid_argument("micromacro: tableau fails validation");
    if (!is_gsa(cfg.tableau)) throw std::invalid_argument("micromacro: a GSA tableau is required");
    if (std::abs(cfg.eps * drift) >= Scalar(1)) throw std::invalid_argument("micromacro: |eps A| < 1 required");

    const Index n = cfg.n_x;
    dx_ = cfg.domain_length / Scalar(n);
    auto upw = upwind_pair<Scalar>(cfg.upwind_order, n, dx_);
    upwind_minus_ = std::make_unique<StencilMatrix<Scalar>>(upw.first);
    upwind_plus_ = std::make_unique<StencilMatrix<Scalar>>(upw.second);
    if (cfg.grid == SpatialGrid::staggered) {
      grad_ = std::make_unique<StencilMatrix<Scalar>>(central_grad_to_g<Scalar>(n, dx_));
      div_ = std::make_unique<StencilMatrix<Scalar>>(central_div_to_rho<Scalar>(n, dx_));
      avg_ = std::make_unique<StencilMatrix<Scalar>>(average_to_g<Scalar>(n));
    } else {
      grad_ = std::make_unique<StencilMatrix<Scalar>>(central_colocated<Scalar>(cfg.central_order, n, dx_));
      div_ = std::make_unique<StencilMatrix<Scalar>>(*grad_);
      avg_ = std::make_unique<StencilMatrix<Scalar>>(StencilMatrix<Scalar>::circulant({Scalar(1)}, 0, n));
    }
    laplacian_ = div_->dense() * grad_->dense();

    const auto& v = grid_.points();
    v_plus_ = (v + v.cwiseAbs()) / Scalar(2);
    v_minus_ = (v - v.cwiseAbs()) / Scalar(2);
    v_weight_ = v.cwiseProduct(grid_.equilibrium());

    // One resolvent and one factorized stage system per distinct diagonal entry.
    const auto& a = cfg.tableau.a_implicit;
    for (Index j = 0; j < cfg.tableau.stages; ++j) {
      const Scalar ajj = a(j, j);
      auto it = cache_.find(ajj);
      if (it == cache_.end()) {
        auto entry = std::make_shared<StageOps>();
        entry->resolvent = std::make_unique<StageResolvent<Scalar>>(collision_, cfg.eps, ajj * cfg.dt);
        entry->diffusion = diffusion_tensor(collision_, *entry->resolvent);
        const Scalar coef = ajj * cfg.dt;
        MatrixX<Scalar> sys = MatrixX<Scalar>::Identity(n, n) - (coef * coef * entry->diffusion) * laplacian_;
        entry->system.compute(sys);
        it = cache_.emplace(ajj, std::move(entry)).first;
      }
      stage_ops_.push_back(it->second);
    }
  }

  const PeriodicConfig<Scalar>& config() const { return cfg_; }
  const VelocityGrid<Scalar>& grid() const { return grid_; }
  const CollisionOperator<Scalar>& collision() const { return collision_; }
  Scalar dx() const { return dx_; }
  Scalar drift() const { return drift_; }
  const StencilMatrix<Scalar>& grad_op() const { return *grad_; }
  const StencilMatrix<Scalar>& div_op() const { return *div_; }

  VectorX<Scalar> rho_nodes() const {
    VectorX<Scalar> x(cfg_.n_x);
    for (Index i = 0; i < cfg_.n_x; ++i) x[i] = Scalar(i) * dx_;
    return x;
  }
  VectorX<Scalar> g_nodes() const {
    VectorX<Scalar> x = rho_nodes();
    if (cfg_.grid == SpatialGrid::staggered) x.array() += dx_ / Scalar(2);
    return x;
  }

  // g(0,x,v) = eps^2 (I-Pi)(v^2 M) rho(0,x): micro part of size O(eps^2).
  MicroMacroState<Scalar> init_well_prepared(const std::function<Scalar(Scalar)>& rho0) const {
    return init_scaled(rho0, cfg_.eps * cfg_.eps);
  }

  // g(0,x,v) = (I-Pi)(v^2 M) rho(0,x): O(1) micro part.
  MicroMacroState<Scalar> init_non_well_prepared(const std::function<Scalar(Scalar)>& rho0) const {
    return init_scaled(rho0, Scalar(1));
  }

  MicroMacroState<Scalar> init_zero_g(const std::function<Scalar(Scalar)>& rho0) const {
    return init_scaled(rho0, Scalar(0));
  }

  // T g = (I - Pi)(v . Grad_x g), upwind in the transport direction.
  template <typename Derived>
  MatrixX<Scalar> transport_term(const Eigen::MatrixBase<Derived>& g) const {
    MatrixX<Scalar> flux = upwind_minus_->apply(g) * v_plus_.asDiagonal();
    flux.noalias() += upwind_plus_->apply(g) * v_minus_.asDiagonal();
    return remove_equilibrium_rows(grid_, flux);
  }

  void step(MicroMacroState<Scalar>& state, StageTrace<Scalar>* trace = nullptr) const {
    const auto& tab = cfg_.tableau;
    const auto& a = tab.a_implicit;
    const auto& ae = tab.a_explicit;
    const Index s = tab.stages;
    const Scalar eps = cfg_.eps;
    const Scalar dt = cfg_.dt;

    std::vector<VectorX<Scalar>> rho_s(s), vb(s);
    std::vector<MatrixX<Scalar>> g_s(s), tg(s), lg(s), vm_grad(s), vm_drift(s);

    for (Index j = 0; j < s; ++j) {
      const Scalar ajj = a(j, j);
      const auto& ops = *stage_ops_[j];

      MatrixX<Scalar> w = eps * state.g;
      for (Index k = 0; k < j; ++k) {
        if (ae(j, k) != Scalar(0)) w.noalias() -= (ae(j, k) * dt) * tg[k];
        if (a(j, k) != Scalar(0)) {
          w.noalias() -= (a(j, k) * dt) * vm_grad[k];
          w.noalias() += (a(j, k) * dt / eps) * lg[k];
        }
        if (drift_ != Scalar(0) && ae(j, k) != Scalar(0))
          w.noalias() += (ae(j, k) * dt * drift_) * vm_drift[k];
      }

      VectorX<Scalar> rhs = state.rho;
      for (Index k = 0; k < j; ++k)
        if (a(j, k) != Scalar(0)) rhs.noalias() -= (a(j, k) * dt / eps) * div_->apply(vb[k]);
      if (ajj != Scalar(0)) {
        MatrixX<Scalar> iw = ops.resolvent->apply_rows(w);
        rhs.noalias() -= (ajj * dt) * div_->apply(v_bracket_rows(grid_, iw));
        rho_s[j] = ops.system.solve(rhs);
      } else {
        rho_s[j] = rhs;
      }

      vm_grad[j] = grad_->apply(rho_s[j]) * v_weight_.transpose();
      MatrixX<Scalar> b = eps * w;
      if (ajj != Scalar(0)) b.noalias() -= (eps * ajj * dt) * vm_grad[j];
      g_s[j] = ops.resolvent->apply_rows(b);

      vb[j] = v_bracket_rows(grid_, g_s[j]);
      tg[j] = transport_term(g_s[j]);
      lg[j] = collision_.apply_rows(g_s[j]);
      if (drift_ != Scalar(0)) vm_drift[j] = avg_->apply(rho_s[j]) * v_weight_.transpose();
    }

    // GSA: the update is the last stage.
    state.rho = rho_s[s - 1];
    state.g = g_s[s - 1];
    state.time += dt;
    if (trace) {
      trace->rho = std::move(rho_s);
      trace->g = std::move(g_s);
    }
  }

  // Advances to t_final (snapped to a whole number of steps). The callback, if
  // given, fires after every `snapshot_every` steps and at the end.
  RunStats<Scalar> run(MicroMacroState<Scalar>& state, Scalar t_final,
                       const std::function<void(const MicroMacroState<Scalar>&, Index)>& snapshot = {},
                       Index snapshot_every = 0) const {
    RunStats<Scalar> stats;
    const Scalar span = t_final - state.time;
    if (span < Scalar(0)) throw std::invalid_argument("run: t_final before current time");
    const Index n_steps = static_cast<Index>(std::llround(span / cfg_.dt));
    stats.t_final_snapped = std::abs(Scalar(n_steps) * cfg_.dt - span) > Scalar(1e-9) * std::max(span, cfg_.dt);
    const Scalar mass0 = state.rho.sum();
    if (snapshot) snapshot(state, 0);
    for (Index i = 1; i <= n_steps; ++i) {
      step(state);
      stats.max_g_bracket =
          std::max(stats.max_g_bracket, bracket_rows(grid_, state.g).cwiseAbs().maxCoeff());
      if (snapshot && ((snapshot_every > 0 && i % snapshot_every == 0) || i == n_steps)) snapshot(state, i);
    }
    stats.steps = n_steps;
    stats.mass_drift = mass0 == Scalar(0) ? std::abs(state.rho.sum() - mass0)
                                          : std::abs(state.rho.sum() - mass0) / std::abs(mass0);
    return stats;
  }

 private:
  struct StageOps {
    std::unique_ptr<StageResolvent<Scalar>> resolvent;
    Scalar diffusion = Scalar(0);
    Eigen::PartialPivLU<MatrixX<Scalar>> system;
  };

  MicroMacroState<Scalar> init_scaled(const std::function<Scalar(Scalar)>& rho0, Scalar scale) const {
    MicroMacroState<Scalar> st;
    VectorX<Scalar> xr = rho_nodes(), xg = g_nodes();
    st.rho = xr.unaryExpr(rho0);
    VectorX<Scalar> v2M = grid_.points().cwiseAbs2().cwiseProduct(grid_.equilibrium());
    VectorX<Scalar> shape = v2M - bracket(grid_, v2M) * grid_.equilibrium();
    st.g = (scale * xg.unaryExpr(rho0)) * shape.transpose();
    return st;
  }

  PeriodicConfig<Scalar> cfg_;
  VelocityGrid<Scalar> grid_;
  CollisionOperator<Scalar> collision_;
  Scalar drift_;
  Scalar dx_;
  std::unique_ptr<StencilMatrix<Scalar>> upwind_minus_, upwind_plus_, grad_, div_, avg_;
  MatrixX<Scalar> laplacian_;
  VectorX<Scalar> v_plus_, v_minus_, v_weight_;
  std::map<Scalar, std::shared_ptr<StageOps>> cache_;
  std::vector<std::shared_ptr<StageOps>> stage_ops_;
};

using MicroMacroSolverd = MicroMacroSolver<double>;

}  // namespace apmm
