#pragma once

// Truncated discrete velocity grid with equilibrium weights, moment brackets
// and the projections used by the micro-macro decomposition.
//
// The grid uses midpoint placement v_k = -v_max + (k+1/2) dv so that it is
// symmetric about 0 and <vM> vanishes to machine precision; that identity is
// load-bearing for the micro-macro split.

#include <cmath>
#include <functional>
#include <stdexcept>

#include "apmm/types.hpp"

namespace apmm {

template <typename Scalar>
Scalar gaussian_equilibrium(Scalar v) {
  const Scalar norm = Scalar(1) / std::sqrt(Scalar(2) * Scalar(EIGEN_PI));
  return norm * std::exp(-v * v / Scalar(2));
}

template <typename Scalar>
class VelocityGrid {
 public:
  using EquilibriumFn = std::function<Scalar(Scalar)>;

  VelocityGrid(Scalar v_max, Index n_v, const EquilibriumFn& equilibrium = &gaussian_equilibrium<Scalar>)
      : v_max_(v_max), dv_(Scalar(2) * v_max / Scalar(n_v)), v_(n_v), weight_(n_v) {
    if (v_max <= Scalar(0)) throw std::invalid_argument("velocity grid: v_max must be positive");
    if (n_v <= 0 || n_v % 2 != 0) throw std::invalid_argument("velocity grid: N_v must be positive and even");
    for (Index k = 0; k < n_v; ++k) {
      v_[k] = -v_max + (Scalar(k) + Scalar(0.5)) * dv_;
      weight_[k] = equilibrium(v_[k]);
      if (!(weight_[k] > Scalar(0))) throw std::invalid_argument("velocity grid: equilibrium must be positive");
    }
    mass_ = weight_.sum() * dv_;
  }

  Index size() const { return v_.size(); }
  Scalar v_max() const { return v_max_; }
  Scalar dv() const { return dv_; }
  const VectorX<Scalar>& points() const { return v_; }
  const VectorX<Scalar>& equilibrium() const { return weight_; }
  /// Total equilibrium measure: sum_k M_k dv (the bracket denominator).
  Scalar equilibrium_mass() const { return mass_; }

 private:
  Scalar v_max_;
  Scalar dv_;
  VectorX<Scalar> v_;
  VectorX<Scalar> weight_;
  Scalar mass_;
};

// <h>_V = (sum_k h_k dv) / (sum_k M_k dv)
template <typename Scalar, typename Derived>
Scalar bracket(const VelocityGrid<Scalar>& grid, const Eigen::MatrixBase<Derived>& h) {
  return h.sum() * grid.dv() / grid.equilibrium_mass();
}

// <v h>_V
template <typename Scalar, typename Derived>
Scalar v_bracket(const VelocityGrid<Scalar>& grid, const Eigen::MatrixBase<Derived>& h) {
  return grid.points().dot(h) * grid.dv() / grid.equilibrium_mass();
}

// Per-row brackets of a space x velocity field (one spatial point per row).
template <typename Scalar, typename Derived>
VectorX<Scalar> bracket_rows(const VelocityGrid<Scalar>& grid, const Eigen::MatrixBase<Derived>& field) {
  return field.rowwise().sum() * (grid.dv() / grid.equilibrium_mass());
}

template <typename Scalar, typename Derived>
VectorX<Scalar> v_bracket_rows(const VelocityGrid<Scalar>& grid, const Eigen::MatrixBase<Derived>& field) {
  return field * grid.points() * (grid.dv() / grid.equilibrium_mass());
}

// Pi h = <h>_V M, the orthogonal projector onto the equilibrium direction.
template <typename Scalar, typename Derived>
VectorX<Scalar> project_pi(const VelocityGrid<Scalar>& grid, const Eigen::MatrixBase<Derived>& h) {
  return bracket(grid, h) * grid.equilibrium();
}

// (I - Pi) applied row-wise to a space x velocity field.
template <typename Scalar, typename Derived>
MatrixX<Scalar> remove_equilibrium_rows(const VelocityGrid<Scalar>& grid, const Eigen::MatrixBase<Derived>& field) {
  return field - bracket_rows(grid, field) * grid.equilibrium().transpose();
}

// Partition of the velocity points by the sign of omega(v); omega extends
// v·n(x) into the domain. The half-plane choice omega = -v makes V_- = {v>0}.
template <typename Scalar>
struct HalfSet {
  Eigen::Array<bool, Eigen::Dynamic, 1> minus;  // true where omega(v_k) < 0
  Scalar minus_mass;                            // sum_{V_-} M_k dv

  static HalfSet make(const VelocityGrid<Scalar>& grid,
                      const std::function<Scalar(Scalar)>& omega = [](Scalar v) { return -v; }) {
    HalfSet hs;
    const Index n = grid.size();
    hs.minus.resize(n);
    hs.minus_mass = Scalar(0);
    for (Index k = 0; k < n; ++k) {
      hs.minus[k] = omega(grid.points()[k]) < Scalar(0);
      if (hs.minus[k]) hs.minus_mass += grid.equilibrium()[k] * grid.dv();
    }
    if (hs.minus_mass <= Scalar(0) || !(hs.minus.count() < n))
      throw std::invalid_argument("half set: both V_- and V_+ must be nonempty");
    return hs;
  }
};

// <h>_{V_-} = (sum_{V_-} h_k dv) / (sum_{V_-} M_k dv)
template <typename Scalar, typename Derived>
Scalar half_bracket(const VelocityGrid<Scalar>& grid, const HalfSet<Scalar>& hs,
                    const Eigen::MatrixBase<Derived>& h) {
  Scalar acc = Scalar(0);
  for (Index k = 0; k < h.size(); ++k)
    if (hs.minus[k]) acc += h[k];
  return acc * grid.dv() / hs.minus_mass;
}

template <typename Scalar, typename Derived>
VectorX<Scalar> half_bracket_rows(const VelocityGrid<Scalar>& grid, const HalfSet<Scalar>& hs,
                                  const Eigen::MatrixBase<Derived>& field) {
  VectorX<Scalar> mask = hs.minus.template cast<Scalar>().matrix();
  return field * mask * (grid.dv() / hs.minus_mass);
}

// Pi^- h = <h>_{V_-} M
template <typename Scalar, typename Derived>
VectorX<Scalar> project_pi_minus(const VelocityGrid<Scalar>& grid, const HalfSet<Scalar>& hs,
                                 const Eigen::MatrixBase<Derived>& h) {
  return half_bracket(grid, hs, h) * grid.equilibrium();
}

template <typename Scalar, typename Derived>
MatrixX<Scalar> remove_equilibrium_rows_minus(const VelocityGrid<Scalar>& grid, const HalfSet<Scalar>& hs,
                                              const Eigen::MatrixBase<Derived>& field) {
  return field - half_bracket_rows(grid, hs, field) * grid.equilibrium().transpose();
}

using VelocityGridd = VelocityGrid<double>;

}  // namespace apmm
