#pragma once

// Double Butcher tableaux for IMEX Runge-Kutta schemes: data model,
// validation, classification and the built-in registry.

#include <cmath>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "apmm/types.hpp"

namespace apmm {

template <typename Scalar>
struct DoubleButcherTableau {
  std::string name;
  Index stages = 0;
  MatrixX<Scalar> a_explicit;  // strictly lower triangular
  MatrixX<Scalar> a_implicit;  // lower triangular
  VectorX<Scalar> b_explicit;
  VectorX<Scalar> b_implicit;
  VectorX<Scalar> c_explicit;
  VectorX<Scalar> c_implicit;
};

enum class SchemeClass { type_a, type_ck_ars, type_ck, invalid };

inline const char* to_string(SchemeClass c) {
  switch (c) {
    case SchemeClass::type_a: return "type A";
    case SchemeClass::type_ck_ars: return "type CK-ARS";
    case SchemeClass::type_ck: return "type CK";
    default: return "invalid";
  }
}

// Returns every violated tableau invariant; empty means valid.
template <typename Scalar>
std::vector<std::string> validate(const DoubleButcherTableau<Scalar>& t, Scalar tol = Scalar(1e-12)) {
  std::vector<std::string> bad;
  const Index s = t.stages;
  auto note = [&bad](const std::string& msg) { bad.push_back(msg); };
  if (s <= 0) {
    note("stage count must be positive");
    return bad;
  }
  if (t.a_explicit.rows() != s || t.a_explicit.cols() != s || t.a_implicit.rows() != s ||
      t.a_implicit.cols() != s || t.b_explicit.size() != s || t.b_implicit.size() != s ||
      t.c_explicit.size() != s || t.c_implicit.size() != s) {
    note("coefficient arrays do not match the stage count");
    return bad;
  }
  for (Index i = 0; i < s; ++i)
    for (Index j = 0; j < s; ++j) {
      if (j >= i && t.a_explicit(i, j) != Scalar(0)) {
        std::ostringstream os;
        os << "a_explicit(" << i << "," << j << ") breaks strict lower triangularity";
        note(os.str());
      }
      if (j > i && t.a_implicit(i, j) != Scalar(0)) {
        std::ostringstream os;
        os << "a_implicit(" << i << "," << j << ") breaks lower triangularity";
        note(os.str());
      }
    }
  for (Index i = 0; i < s; ++i) {
    Scalar row_ex = t.a_explicit.row(i).head(i).sum();
    Scalar row_im = t.a_implicit.row(i).head(i + 1).sum();
    if (std::abs(row_ex - t.c_explicit[i]) > tol) {
      std::ostringstream os;
      os << "explicit row " << i << " sums to " << row_ex << " but c~_" << i + 1 << " = " << t.c_explicit[i];
      note(os.str());
    }
    if (std::abs(row_im - t.c_implicit[i]) > tol) {
      std::ostringstream os;
      os << "implicit row " << i << " sums to " << row_im << " but c_" << i + 1 << " = " << t.c_implicit[i];
      note(os.str());
    }
  }
  return bad;
}

// Globally stiffly accurate: c_s = c~_s = 1 and the last rows equal b.
template <typename Scalar>
bool is_gsa(const DoubleButcherTableau<Scalar>& t, Scalar tol = Scalar(1e-12)) {
  const Index s = t.stages;
  if (s <= 0) return false;
  if (std::abs(t.c_implicit[s - 1] - Scalar(1)) > tol) return false;
  if (std::abs(t.c_explicit[s - 1] - Scalar(1)) > tol) return false;
  return (t.a_implicit.row(s - 1).transpose() - t.b_implicit).template lpNorm<Eigen::Infinity>() <= tol &&
         (t.a_explicit.row(s - 1).transpose() - t.b_explicit).template lpNorm<Eigen::Infinity>() <= tol;
}

template <typename Scalar>
SchemeClass classify(const DoubleButcherTableau<Scalar>& t) {
  if (!validate(t).empty()) return SchemeClass::invalid;
  const Index s = t.stages;
  // Lower triangular, so invertibility is a nonzero diagonal.
  bool diag_ok = true;
  for (Index i = 0; i < s; ++i) diag_ok = diag_ok && t.a_implicit(i, i) != Scalar(0);
  if (diag_ok) return SchemeClass::type_a;
  const bool first_row_zero = t.a_implicit.row(0).cwiseAbs().maxCoeff() == Scalar(0);
  bool trailing_ok = s > 1;
  for (Index i = 1; i < s; ++i) trailing_ok = trailing_ok && t.a_implicit(i, i) != Scalar(0);
  if (first_row_zero && trailing_ok) {
    const bool first_col_zero = t.a_implicit.col(0).cwiseAbs().maxCoeff() == Scalar(0);
    return first_col_zero ? SchemeClass::type_ck_ars : SchemeClass::type_ck;
  }
  return SchemeClass::invalid;
}

template <typename Scalar>
struct TableauOptions {
  // gamma >= 1/2 for DP-A(1,2,1); the DIRK stages are backward-Euler solves at
  // the default gamma = 1.
  Scalar dp_a121_gamma = Scalar(1);
  // Not stated in the usual references for DP2-A(2,4,2); 1 - 1/sqrt(2) is the
  // standard choice in the IMEX literature.
  Scalar dp2_a242_gamma = Scalar(1) - Scalar(1) / std::sqrt(Scalar(2));
};

namespace detail {

template <typename Scalar>
DoubleButcherTableau<Scalar> assemble(std::string name, Index s, std::initializer_list<Scalar> a_ex,
                                      std::initializer_list<Scalar> a_im) {
  DoubleButcherTableau<Scalar> t;
  t.name = std::move(name);
  t.stages = s;
  t.a_explicit = MatrixX<Scalar>::Zero(s, s);
  t.a_implicit = MatrixX<Scalar>::Zero(s, s);
  Index k = 0;
  for (auto v : a_ex) {
    t.a_explicit(k / s, k % s) = v;
    ++k;
  }
  k = 0;
  for (auto v : a_im) {
    t.a_implicit(k / s, k % s) = v;
    ++k;
  }
  t.b_explicit = t.a_explicit.row(s - 1).transpose();
  t.b_implicit = t.a_implicit.row(s - 1).transpose();
  t.c_explicit = t.a_explicit.rowwise().sum();
  t.c_implicit = t.a_implicit.rowwise().sum();
  return t;
}

}  // namespace detail

inline const std::vector<std::string>& builtin_tableau_names() {
  static const std::vector<std::string> names = {"ARS111", "ARS222", "ARS443",
                                                 "DP_A121", "DP2_A242", "DP1_A242"};
  return names;
}

template <typename Scalar>
DoubleButcherTableau<Scalar> builtin_tableau(const std::string& name, const TableauOptions<Scalar>& opt = {}) {
  using detail::assemble;
  const Scalar z = Scalar(0);
  if (name == "ARS111") {
    return assemble<Scalar>("ARS111", 2, {z, z, Scalar(1), z}, {z, z, z, Scalar(1)});
  }
  if (name == "ARS222") {
    const Scalar g = Scalar(1) - Scalar(1) / std::sqrt(Scalar(2));
    const Scalar d = Scalar(1) - Scalar(1) / (Scalar(2) * g);
    return assemble<Scalar>("ARS222", 3,
                            {z, z, z, g, z, z, d, Scalar(1) - d, z},
                            {z, z, z, z, g, z, z, Scalar(1) - g, g});
  }
  if (name == "ARS443") {
    const Scalar h = Scalar(0.5);
    return assemble<Scalar>(
        "ARS443", 5,
        {z, z, z, z, z,
         h, z, z, z, z,
         Scalar(11) / 18, Scalar(1) / 18, z, z, z,
         Scalar(5) / 6, Scalar(-5) / 6, h, z, z,
         Scalar(0.25), Scalar(1.75), Scalar(0.75), Scalar(-1.75), z},
        {z, z, z, z, z,
         z, h, z, z, z,
         z, Scalar(1) / 6, h, z, z,
         z, -h, h, h, z,
         z, Scalar(1.5), Scalar(-1.5), h, h});
  }
  if (name == "DP_A121") {
    const Scalar g = opt.dp_a121_gamma;
    if (g < Scalar(0.5)) throw std::invalid_argument("DP_A121: gamma must be >= 1/2");
    return assemble<Scalar>("DP_A121", 2, {z, z, Scalar(1), z}, {g, z, Scalar(1) - g, g});
  }
  if (name == "DP2_A242") {
    const Scalar g = opt.dp2_a242_gamma;
    const Scalar h = Scalar(0.5);
    return assemble<Scalar>("DP2_A242", 4,
                            {z, z, z, z,
                             z, z, z, z,
                             z, Scalar(1), z, z,
                             z, h, h, z},
                            {g, z, z, z,
                             -g, g, z, z,
                             z, Scalar(1) - g, g, z,
                             z, h, h - g, g});
  }
  if (name == "DP1_A242") {
    const Scalar h = Scalar(0.5);
    // The printed "1 - 3/2" entry read literally breaks the row-sum identity
    // c_4 = sum_j a_4j; stored as -3/2 so the GSA row sums to 1.
    return assemble<Scalar>("DP1_A242", 4,
                            {z, z, z, z,
                             Scalar(1) / 3, z, z, z,
                             Scalar(1), z, z, z,
                             h, z, h, z},
                            {h, z, z, z,
                             Scalar(1) / 6, h, z, z,
                             -h, h, h, z,
                             Scalar(1.5), Scalar(-1.5), h, h});
  }
  throw std::invalid_argument("unknown tableau '" + name + "'; available: ARS111 ARS222 ARS443 DP_A121 DP2_A242 DP1_A242");
}

using DoubleButcherTableaud = DoubleButcherTableau<double>;

}  // namespace apmm
