#pragma once

// Error norms, observed-order estimation, AP residual diagnostics, and the
// nested-sum tensor machinery that identifies the eps -> 0 limit scheme of
// the advection-diffusion time integrator.

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "apmm/collision.hpp"
#include "apmm/stencil.hpp"
#include "apmm/tableau.hpp"
#include "apmm/types.hpp"
#include "apmm/velocity_grid.hpp"

namespace apmm {

enum class ErrorNorm { l2, linf };

template <typename Scalar>
Scalar error(const VectorX<Scalar>& a, const VectorX<Scalar>& b, ErrorNorm norm, Scalar dx = Scalar(1)) {
  if (a.size() != b.size()) throw std::invalid_argument("error: grid mismatch");
  if (norm == ErrorNorm::linf) return (a - b).template lpNorm<Eigen::Infinity>();
  return std::sqrt((a - b).squaredNorm() * dx);
}

template <typename Scalar>
struct OrderFit {
  Scalar slope = Scalar(0);
  Index first_used = 0;  // coarsest point kept in the fit
  Index last_used = 0;   // finest point kept in the fit
};

namespace detail {

template <typename Scalar>
Scalar least_squares_slope(const std::vector<Scalar>& errors, const std::vector<Scalar>& steps, Index from,
                           Index to) {
  const Index n = to - from + 1;
  Scalar sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (Index i = from; i <= to; ++i) {
    const Scalar x = std::log(steps[i]);
    const Scalar y = std::log(errors[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (Scalar(n) * sxy - sx * sy) / (Scalar(n) * sxx - sx * sx);
}

}  // namespace detail

// Least-squares slope of log(error) against log(step). An endpoint is
// excluded (at most one per side, keeping at least 3 points) when its
// adjacent pairwise slope strays from the median pairwise slope by more than
// 0.4: the coarse end is then pre-asymptotic, the fine end saturated against
// the reference or an eps-dependent floor. The window used is reported.
template <typename Scalar>
OrderFit<Scalar> observed_order(const std::vector<Scalar>& errors, const std::vector<Scalar>& steps) {
  const Index n = static_cast<Index>(errors.size());
  if (errors.size() != steps.size() || n < 3)
    throw std::invalid_argument("observed_order: need at least 3 matching data points");
  for (Scalar e : errors)
    if (!(e > Scalar(0))) throw std::invalid_argument("observed_order: errors must be positive");
  std::vector<Scalar> pair(n - 1);
  for (Index i = 0; i + 1 < n; ++i)
    pair[i] = std::log(errors[i] / errors[i + 1]) / std::log(steps[i] / steps[i + 1]);
  std::vector<Scalar> sorted = pair;
  std::sort(sorted.begin(), sorted.end());
  const Scalar median = sorted.size() % 2 == 1
                            ? sorted[sorted.size() / 2]
                            : (sorted[sorted.size() / 2 - 1] + sorted[sorted.size() / 2]) / Scalar(2);
  OrderFit<Scalar> fit;
  fit.first_used = 0;
  fit.last_used = n - 1;
  if (n >= 4 && std::abs(pair.front() - median) > Scalar(0.4)) fit.first_used = 1;
  if (fit.last_used - fit.first_used + 1 >= 4 && std::abs(pair.back() - median) > Scalar(0.4))
    fit.last_used = n - 2;
  fit.slope = detail::least_squares_slope(errors, steps, fit.first_used, fit.last_used);
  return fit;
}

// || g - eps L^{-1}(vM) (Grad rho) ||_inf over all x and v: the distance of
// the micro part from its Chapman-Enskog leading term.
template <typename Scalar>
Scalar ap_residual(const MatrixX<Scalar>& g, const VectorX<Scalar>& rho, Scalar eps,
                   const CollisionOperator<Scalar>& collision, const StencilMatrix<Scalar>& grad) {
  const auto& grid = collision.grid();
  VectorX<Scalar> vM = grid.points().cwiseProduct(grid.equilibrium());
  VectorX<Scalar> linv_vm = collision.pseudo_inverse(vM);
  MatrixX<Scalar> target = (eps * grad.apply(rho)) * linv_vm.transpose();
  return (g - target).cwiseAbs().maxCoeff();
}

// Nested-sum tensor of the limit identification. Evaluated with stand-in
// space vectors r1_k ~ Grad rho^(k) and r2_k ~ A rho^(k); the velocity factor
// is always L^{-1}(vM), so each value is an x-vector.
//
// Pi^m_{j,k1} = < v (a_{j k1}/a_{k1 k1}) S^{k0} S^{k1} ... S^{k_{m-1}} R^{k_m} >_V,
// S^{k0} = 1, S^{k_l} = sum_{k'=1}^{k_l - 1} a_{k_l k'} / a_{k' k'},
// R^{k} = sum_{k'<=k} a_{k k'} L^{-1}(vM) r1_{k'} - sum_{k'<k} ta_{k k'} L^{-1}(vM) r2_{k'},
// with the empty-sum convention sum_1^0 = 0.
template <typename Scalar>
class PiTensorEvaluator {
 public:
  // start_stage is 0 for type A; 1 for CK-ARS, where all indices shift by one
  // because a_11 = 0.
  PiTensorEvaluator(const DoubleButcherTableau<Scalar>& tableau, const VelocityGrid<Scalar>& grid,
                    const CollisionOperator<Scalar>& collision, std::vector<VectorX<Scalar>> grad_standins,
                    std::vector<VectorX<Scalar>> drift_standins, Index start_stage = 0)
      : tab_(tableau), r1_(std::move(grad_standins)), r2_(std::move(drift_standins)), start_(start_stage) {
    if (static_cast<Index>(r1_.size()) != tab_.stages || static_cast<Index>(r2_.size()) != tab_.stages)
      throw std::invalid_argument("pi tensor: one stand-in vector per stage required");
    VectorX<Scalar> vM = grid.points().cwiseProduct(grid.equilibrium());
    v_linv_vm_ = v_bracket(grid, collision.pseudo_inverse(vM));  // <v L^{-1}(vM)> = -kappa
    for (Index j = start_; j < tab_.stages; ++j)
      if (tab_.a_implicit(j, j) == Scalar(0))
        throw std::invalid_argument("pi tensor: zero implicit diagonal inside the active stage range");
  }

  Scalar v_linv_vm() const { return v_linv_vm_; }

  // One-based stage indices j, k1 and depth m, matching the definition.
  VectorX<Scalar> eval(Index j, Index k1, Index m) const {
    const Index jj = start_ + j - 1, kk = start_ + k1 - 1;
    const Scalar w = tab_.a_implicit(jj, kk) / tab_.a_implicit(kk, kk);
    return (v_linv_vm_ * w) * chain(kk, m);
  }

  // sum_{k1} sum_{l} (-1)^l Pi^l_{j,k1}: the per-stage content of the
  // alternating-sum limit, before the outer divergence.
  VectorX<Scalar> alternating_sum(Index j) const {
    VectorX<Scalar> acc = VectorX<Scalar>::Zero(r1_.front().size());
    for (Index k1 = 1; k1 <= j; ++k1)
      for (Index m = 1; m <= j; ++m) acc += Scalar(m % 2 == 0 ? 1 : -1) * eval(j, k1, m);
    return acc;
  }

  // Closed form of the limit theorem with the same stand-ins:
  // -sum_{k<=j} a_jk <v L^{-1}(vM)> r1_k + sum_{k<j} ta_jk <v L^{-1}(vM)> r2_k.
  VectorX<Scalar> closed_form(Index j) const {
    const Index jj = start_ + j - 1;
    VectorX<Scalar> acc = VectorX<Scalar>::Zero(r1_.front().size());
    for (Index k = start_; k <= jj; ++k) acc -= (tab_.a_implicit(jj, k) * v_linv_vm_) * r1_[k];
    for (Index k = start_; k < jj; ++k) acc += (tab_.a_explicit(jj, k) * v_linv_vm_) * r2_[k];
    return acc;
  }

  // Number of active stages (j ranges over 1..count in one-based indexing).
  Index stage_count() const { return tab_.stages - start_; }

 private:
  // chain(k, 1) = R-vector of stage k (zero-based); chain(k, d) applies one
  // more embedded S-sum.
  VectorX<Scalar> chain(Index k, Index depth) const {
    if (depth == 1) return r_vector(k);
    VectorX<Scalar> acc = VectorX<Scalar>::Zero(r1_.front().size());
    for (Index kp = start_; kp < k; ++kp)
      acc += (tab_.a_implicit(k, kp) / tab_.a_implicit(kp, kp)) * chain(kp, depth - 1);
    return acc;
  }

  VectorX<Scalar> r_vector(Index k) const {
    VectorX<Scalar> acc = VectorX<Scalar>::Zero(r1_.front().size());
    for (Index kp = start_; kp <= k; ++kp) acc += tab_.a_implicit(k, kp) * r1_[kp];
    for (Index kp = start_; kp < k; ++kp) acc -= tab_.a_explicit(k, kp) * r2_[kp];
    return acc;
  }

  DoubleButcherTableau<Scalar> tab_;
  std::vector<VectorX<Scalar>> r1_, r2_;
  Index start_;
  Scalar v_linv_vm_;
};

// Max deviation between the alternating Pi-sum and the closed-form limit over
// all stages; vanishes identically for valid type-A tableaux.
template <typename Scalar>
Scalar limit_scheme_check(const PiTensorEvaluator<Scalar>& pi) {
  Scalar worst = Scalar(0);
  for (Index j = 1; j <= pi.stage_count(); ++j) {
    VectorX<Scalar> lhs = pi.alternating_sum(j);
    VectorX<Scalar> rhs = pi.closed_form(j);
    worst = std::max(worst, (lhs - rhs).template lpNorm<Eigen::Infinity>());
  }
  return worst;
}

}  // namespace apmm
