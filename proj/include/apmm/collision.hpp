#pragma once

// Collision operators on the velocity grid: the BGK operator L, user-supplied
// operators validated against the null-space/range/self-adjointness
// requirements, the pseudo-inverse on the zero-mean subspace, the per-stage
// resolvents (eps^2 I - a dt L)^{-1}, and the half-moment operator
// L~ = (I - Pi^-) L used by the inflow solver.

#include <cmath>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "apmm/types.hpp"
#include "apmm/velocity_grid.hpp"

namespace apmm {

template <typename Scalar>
class CollisionOperator {
 public:
  enum class Kind { bgk, custom };

  // L h = <h>_V M - h
  static CollisionOperator bgk(const VelocityGrid<Scalar>& grid) {
    MatrixX<Scalar> m = grid.equilibrium() * VectorX<Scalar>::Constant(grid.size(), grid.dv() / grid.equilibrium_mass()).transpose();
    m -= MatrixX<Scalar>::Identity(grid.size(), grid.size());
    return CollisionOperator(grid, std::move(m), Kind::bgk);
  }

  // Validates N(L) = span(M), zero-mean range and weighted self-adjointness
  // before accepting the matrix.
  static CollisionOperator custom(const VelocityGrid<Scalar>& grid, MatrixX<Scalar> m) {
    auto bad = check(grid, m);
    if (!bad.empty()) {
      std::string msg = "collision matrix rejected:";
      for (const auto& b : bad) msg += "\n  " + b;
      throw std::invalid_argument(msg);
    }
    return CollisionOperator(grid, std::move(m), Kind::custom);
  }

  static std::vector<std::string> check(const VelocityGrid<Scalar>& grid, const MatrixX<Scalar>& m,
                                        Scalar tol = Scalar(1e-10)) {
    std::vector<std::string> bad;
    if (m.rows() != grid.size() || m.cols() != grid.size()) {
      bad.push_back("matrix size does not match the velocity grid");
      return bad;
    }
    const Scalar scale = m.cwiseAbs().maxCoeff();
    if ((m * grid.equilibrium()).cwiseAbs().maxCoeff() > tol * scale)
      bad.push_back("M is not in the null space");
    VectorX<Scalar> ones = VectorX<Scalar>::Ones(grid.size());
    // <L h> = 0 for all h means the bracket functional annihilates every column.
    if ((m.transpose() * ones).cwiseAbs().maxCoeff() * grid.dv() / grid.equilibrium_mass() > tol * scale)
      bad.push_back("range is not zero-mean");
    // Self-adjointness in sum h1 h2 M^{-1} dv: M^{-1}-weighted symmetry.
    MatrixX<Scalar> w = grid.equilibrium().cwiseInverse().asDiagonal() * m;
    if ((w - w.transpose()).cwiseAbs().maxCoeff() > tol * w.cwiseAbs().maxCoeff())
      bad.push_back("not self-adjoint in the M^{-1}-weighted inner product");
    Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>> es(
        (MatrixX<Scalar>(grid.equilibrium().cwiseSqrt().cwiseInverse().asDiagonal()) * m *
         MatrixX<Scalar>(grid.equilibrium().cwiseSqrt().asDiagonal())));
    if (es.info() == Eigen::Success && es.eigenvalues().maxCoeff() > tol * scale)
      bad.push_back("not non-positive");
    return bad;
  }

  const VelocityGrid<Scalar>& grid() const { return grid_; }
  const MatrixX<Scalar>& matrix() const { return mat_; }
  Kind kind() const { return kind_; }

  template <typename Derived>
  VectorX<Scalar> apply(const Eigen::MatrixBase<Derived>& h) const {
    return mat_ * h;
  }

  // Row-wise application to a space x velocity field.
  template <typename Derived>
  MatrixX<Scalar> apply_rows(const Eigen::MatrixBase<Derived>& field) const {
    return field * mat_.transpose();
  }

  // Solves L u = h with <u>_V = 0 through a bordered system that deflates the
  // M direction. h must be in the range of L (zero bracket).
  template <typename Derived>
  VectorX<Scalar> pseudo_inverse(const Eigen::MatrixBase<Derived>& h, Scalar tol = Scalar(1e-10)) const {
    const Scalar beta = bracket(grid_, h);
    const Scalar scale = h.cwiseAbs().maxCoeff();
    if (std::abs(beta) > tol * std::max(scale, Scalar(1)))
      throw std::invalid_argument("pseudo_inverse: input has nonzero bracket, not in R(L)");
    VectorX<Scalar> rhs(grid_.size() + 1);
    rhs.head(grid_.size()) = h;
    rhs[grid_.size()] = Scalar(0);
    VectorX<Scalar> sol = bordered_->solve(rhs);
    return sol.head(grid_.size());
  }

  template <typename Derived>
  MatrixX<Scalar> pseudo_inverse_rows(const Eigen::MatrixBase<Derived>& field, Scalar tol = Scalar(1e-10)) const {
    MatrixX<Scalar> out(field.rows(), field.cols());
    for (Index r = 0; r < field.rows(); ++r)
      out.row(r) = pseudo_inverse(field.row(r).transpose(), tol).transpose();
    return out;
  }

  // kappa = -<v L^{-1}(v M)>_V > 0, the diffusion coefficient of the limit.
  Scalar kappa() const { return kappa_; }

  // Advection-diffusion operator: L f + eps v M A <f>_V. Reference kinetic use.
  template <typename Derived>
  VectorX<Scalar> advdiff_apply(Scalar drift, Scalar eps, const Eigen::MatrixBase<Derived>& f) const {
    if (std::abs(eps * drift) >= Scalar(1))
      throw std::invalid_argument("advdiff_apply: |eps A| < 1 required");
    VectorX<Scalar> vM = grid_.points().cwiseProduct(grid_.equilibrium());
    return mat_ * f + (eps * drift * bracket(grid_, f)) * vM;
  }

 private:
  CollisionOperator(const VelocityGrid<Scalar>& grid, MatrixX<Scalar> m, Kind kind)
      : grid_(grid), mat_(std::move(m)), kind_(kind) {
    const Index n = grid_.size();
    MatrixX<Scalar> k(n + 1, n + 1);
    k.topLeftCorner(n, n) = mat_;
    k.topRightCorner(n, 1) = grid_.equilibrium();
    k.bottomLeftCorner(1, n) = VectorX<Scalar>::Constant(n, grid_.dv() / grid_.equilibrium_mass()).transpose();
    k(n, n) = Scalar(0);
    bordered_ = std::make_shared<Eigen::PartialPivLU<MatrixX<Scalar>>>(k);
    VectorX<Scalar> vM = grid_.points().cwiseProduct(grid_.equilibrium());
    kappa_ = -v_bracket(grid_, pseudo_inverse(vM));
  }

  VelocityGrid<Scalar> grid_;
  MatrixX<Scalar> mat_;
  Kind kind_;
  std::shared_ptr<Eigen::PartialPivLU<MatrixX<Scalar>>> bordered_;
  Scalar kappa_;
};

// Factorized (eps^2 I - a_dt L)^{-1}, one per distinct implicit diagonal entry.
template <typename Scalar>
class StageResolvent {
 public:
  StageResolvent(const MatrixX<Scalar>& op_matrix, Scalar eps, Scalar a_dt) : eps_(eps), a_dt_(a_dt) {
    if (!(eps > Scalar(0))) throw std::invalid_argument("stage resolvent: eps must be positive");
    const Index n = op_matrix.rows();
    MatrixX<Scalar> m = (eps * eps) * MatrixX<Scalar>::Identity(n, n) - a_dt * op_matrix;
    lu_.compute(m);
  }

  StageResolvent(const CollisionOperator<Scalar>& op, Scalar eps, Scalar a_dt)
      : StageResolvent(op.matrix(), eps, a_dt) {}

  Scalar eps() const { return eps_; }
  Scalar a_dt() const { return a_dt_; }

  template <typename Derived>
  VectorX<Scalar> apply(const Eigen::MatrixBase<Derived>& h) const {
    return lu_.solve(h.eval());
  }

  // Row-wise application to a space x velocity field.
  template <typename Derived>
  MatrixX<Scalar> apply_rows(const Eigen::MatrixBase<Derived>& field) const {
    return lu_.solve(field.transpose()).transpose();
  }

 private:
  Scalar eps_, a_dt_;
  Eigen::PartialPivLU<MatrixX<Scalar>> lu_;
};

// D = <v (eps^2 I - a dt L)^{-1}(v M)>_V, the 1D stage diffusion coefficient.
template <typename Scalar>
Scalar diffusion_tensor(const CollisionOperator<Scalar>& op, const StageResolvent<Scalar>& resolvent) {
  const auto& grid = op.grid();
  VectorX<Scalar> vM = grid.points().cwiseProduct(grid.equilibrium());
  return v_bracket(grid, resolvent.apply(vM));
}

// L~ = (I - Pi^-) L; null space stays span(M), outputs have zero half bracket.
template <typename Scalar>
MatrixX<Scalar> tilde_operator(const CollisionOperator<Scalar>& op, const HalfSet<Scalar>& hs) {
  const auto& grid = op.grid();
  const Index n = grid.size();
  VectorX<Scalar> half_row = hs.minus.template cast<Scalar>().matrix() * (grid.dv() / hs.minus_mass);
  MatrixX<Scalar> pi_minus = grid.equilibrium() * half_row.transpose();
  return (MatrixX<Scalar>::Identity(n, n) - pi_minus) * op.matrix();
}

// Pseudo-inverse of L~ constrained to zero half bracket (bordered solve).
template <typename Scalar>
class TildePseudoInverse {
 public:
  TildePseudoInverse(const VelocityGrid<Scalar>& grid, const HalfSet<Scalar>& hs, const MatrixX<Scalar>& ltilde) {
    const Index n = grid.size();
    MatrixX<Scalar> k(n + 1, n + 1);
    k.topLeftCorner(n, n) = ltilde;
    k.topRightCorner(n, 1) = grid.equilibrium();
    k.bottomLeftCorner(1, n) =
        (hs.minus.template cast<Scalar>().matrix() * (grid.dv() / hs.minus_mass)).transpose();
    k(n, n) = Scalar(0);
    lu_.compute(k);
    n_ = n;
  }

  template <typename Derived>
  VectorX<Scalar> apply(const Eigen::MatrixBase<Derived>& h) const {
    VectorX<Scalar> rhs(n_ + 1);
    rhs.head(n_) = h;
    rhs[n_] = Scalar(0);
    return lu_.solve(rhs).head(n_);
  }

 private:
  Eigen::PartialPivLU<MatrixX<Scalar>> lu_;
  Index n_;
};

}  // namespace apmm
