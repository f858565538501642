#pragma once

// Finite-difference stencil matrices. Periodic operators are circulants kept
// in coefficient+offset form (apply cost O(n * width)); bounded-domain
// operators are small dense banded matrices assembled once.
//
// A stencil is written as a coefficient list with one entry marked as the
// diagonal: circ([-1, 1*], n) has 1 on the diagonal, -1 on the subdiagonal,
// and wraps periodically. The bounded variant truncates instead of wrapping.

#include <stdexcept>
#include <utility>
#include <vector>

#include "apmm/types.hpp"

namespace apmm {

template <typename Scalar>
class StencilMatrix {
 public:
  // Periodic circulant: entry coeffs[q] sits on (offset = q - diag_index) mod n.
  static StencilMatrix circulant(std::vector<Scalar> coeffs, Index diag_index, Index n, Scalar scale = Scalar(1)) {
    if (diag_index < 0 || diag_index >= static_cast<Index>(coeffs.size()))
      throw std::invalid_argument("circ: marked diagonal entry outside coefficient list");
    if (n < static_cast<Index>(coeffs.size())) throw std::invalid_argument("circ: n smaller than stencil width");
    StencilMatrix s;
    s.rows_ = s.cols_ = n;
    s.periodic_ = true;
    s.scale_ = scale;
    s.coeffs_ = std::move(coeffs);
    s.diag_ = diag_index;
    return s;
  }

  // Bounded band: same layout, but entries falling outside [0, cols) are dropped.
  static StencilMatrix band(std::vector<Scalar> coeffs, Index diag_index, Index rows, Index cols,
                            Scalar scale = Scalar(1)) {
    if (diag_index < 0 || diag_index >= static_cast<Index>(coeffs.size()))
      throw std::invalid_argument("band: marked diagonal entry outside coefficient list");
    StencilMatrix s;
    s.rows_ = rows;
    s.cols_ = cols;
    s.periodic_ = false;
    s.scale_ = scale;
    s.coeffs_ = std::move(coeffs);
    s.diag_ = diag_index;
    return s;
  }

  Index rows() const { return rows_; }
  Index cols() const { return cols_; }

  // Apply to a vector, or column-by-column to a matrix of grid functions.
  template <typename Derived>
  MatrixX<Scalar> apply(const Eigen::MatrixBase<Derived>& in) const {
    if (in.rows() != cols_) throw std::invalid_argument("stencil apply: size mismatch");
    MatrixX<Scalar> out = MatrixX<Scalar>::Zero(rows_, in.cols());
    const Index w = static_cast<Index>(coeffs_.size());
    for (Index r = 0; r < rows_; ++r) {
      for (Index q = 0; q < w; ++q) {
        Index c = r + q - diag_;
        if (periodic_) {
          c = ((c % cols_) + cols_) % cols_;
        } else if (c < 0 || c >= cols_) {
          continue;
        }
        out.row(r) += (scale_ * coeffs_[q]) * in.row(c);
      }
    }
    return out;
  }

  MatrixX<Scalar> dense() const {
    MatrixX<Scalar> m = MatrixX<Scalar>::Zero(rows_, cols_);
    const Index w = static_cast<Index>(coeffs_.size());
    for (Index r = 0; r < rows_; ++r)
      for (Index q = 0; q < w; ++q) {
        Index c = r + q - diag_;
        if (periodic_)
          c = ((c % cols_) + cols_) % cols_;
        else if (c < 0 || c >= cols_)
          continue;
        m(r, c) += scale_ * coeffs_[q];
      }
    return m;
  }

 private:
  Index rows_ = 0, cols_ = 0;
  Index diag_ = 0;
  bool periodic_ = true;
  Scalar scale_ = Scalar(1);
  std::vector<Scalar> coeffs_;
};

enum class SpatialGrid { staggered, colocated };

// Upwind gradient pair (G-, G+) for v>0 / v<0 transport.
template <typename Scalar>
std::pair<StencilMatrix<Scalar>, StencilMatrix<Scalar>> upwind_pair(int order, Index n, Scalar dx) {
  using S = StencilMatrix<Scalar>;
  const Scalar inv = Scalar(1) / dx;
  switch (order) {
    case 1:
      return {S::circulant({Scalar(-1), Scalar(1)}, 1, n, inv),
              S::circulant({Scalar(-1), Scalar(1)}, 0, n, inv)};
    case 3:
      return {S::circulant({Scalar(1), Scalar(-6), Scalar(3), Scalar(2)}, 2, n, inv / Scalar(6)),
              S::circulant({Scalar(-2), Scalar(-3), Scalar(6), Scalar(-1)}, 1, n, inv / Scalar(6))};
    default:
      throw std::invalid_argument("upwind_pair: supported orders are 1 and 3");
  }
}

// Staggered two-point gradient taking rho-grid values to the g grid.
template <typename Scalar>
StencilMatrix<Scalar> central_grad_to_g(Index n, Scalar dx) {
  return StencilMatrix<Scalar>::circulant({Scalar(-1), Scalar(1)}, 0, n, Scalar(1) / dx);
}

// Staggered two-point divergence taking g-grid values back to the rho grid.
// Composed with central_grad_to_g it gives the standard 3-point Laplacian.
template <typename Scalar>
StencilMatrix<Scalar> central_div_to_rho(Index n, Scalar dx) {
  return StencilMatrix<Scalar>::circulant({Scalar(-1), Scalar(1)}, 1, n, Scalar(1) / dx);
}

// Colocated central gradient, order 2 or 4; used for both roles on that grid.
template <typename Scalar>
StencilMatrix<Scalar> central_colocated(int order, Index n, Scalar dx) {
  using S = StencilMatrix<Scalar>;
  switch (order) {
    case 2:
      return S::circulant({Scalar(-1), Scalar(0), Scalar(1)}, 1, n, Scalar(1) / (Scalar(2) * dx));
    case 4:
      return S::circulant({Scalar(1), Scalar(-8), Scalar(0), Scalar(8), Scalar(-1)}, 2, n,
                          Scalar(1) / (Scalar(12) * dx));
    default:
      throw std::invalid_argument("central_colocated: supported orders are 2 and 4");
  }
}

// Midpoint average taking rho-grid values to the g grid (staggered drift term).
template <typename Scalar>
StencilMatrix<Scalar> average_to_g(Index n) {
  return StencilMatrix<Scalar>::circulant({Scalar(1), Scalar(1)}, 0, n, Scalar(0.5));
}

// Bounded-domain operators for the inflow solver; n_x is the number of nodes
// of the closed grid x_i = i dx, i = 0..n_x-1, dx = L/(n_x-1).
template <typename Scalar>
struct BoundaryOperators {
  StencilMatrix<Scalar> upwind_minus;  // (n_x-1) x (n_x+1), backward difference on the closed half grid
  StencilMatrix<Scalar> upwind_plus;   // (n_x-1) x (n_x+1), forward difference
  StencilMatrix<Scalar> div_to_rho;    // (n_x-2) x (n_x-1)
  StencilMatrix<Scalar> avg_to_rho;    // (n_x-2) x (n_x-1)
  StencilMatrix<Scalar> grad_to_g;     // (n_x-1) x (n_x-2), interior part of the closed difference
};

template <typename Scalar>
BoundaryOperators<Scalar> boundary_operators(Index n_x, Scalar dx) {
  if (n_x < 4) throw std::invalid_argument("boundary_operators: need N_x >= 4");
  using S = StencilMatrix<Scalar>;
  const Scalar inv = Scalar(1) / dx;
  BoundaryOperators<Scalar> b{
      S::band({Scalar(-1), Scalar(1)}, 0, n_x - 1, n_x + 1, inv),
      S::band({Scalar(0), Scalar(-1), Scalar(1)}, 0, n_x - 1, n_x + 1, inv),
      S::band({Scalar(-1), Scalar(1)}, 0, n_x - 2, n_x - 1, inv),
      S::band({Scalar(1), Scalar(1)}, 0, n_x - 2, n_x - 1, Scalar(0.5)),
      S::band({Scalar(-1), Scalar(1)}, 1, n_x - 1, n_x - 2, inv)};
  return b;
}

// [-rho_b(left), 0, ..., 0, rho_b(right)]^T / dx; pairs with grad_to_g so that
// grad_to_g * rho_interior + this equals the closed-grid two-point difference.
template <typename Scalar>
VectorX<Scalar> boundary_rho_vector(Scalar rho_b_left, Scalar rho_b_right, Scalar dx, Index n_x) {
  VectorX<Scalar> v = VectorX<Scalar>::Zero(n_x - 1);
  v[0] = -rho_b_left / dx;
  v[n_x - 2] = rho_b_right / dx;
  return v;
}

}  // namespace apmm
