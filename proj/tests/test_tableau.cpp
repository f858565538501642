#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "apmm/io.hpp"
#include "apmm/tableau.hpp"

using namespace apmm;

TEST_CASE("builtins validate, are GSA, and classify by family") {
  for (const auto& name : builtin_tableau_names()) {
    auto t = builtin_tableau<double>(name);
    CAPTURE(name);
    CHECK(validate(t).empty());
    CHECK(is_gsa(t));
    const auto cls = classify(t);
    if (name.rfind("ARS", 0) == 0)
      CHECK(cls == SchemeClass::type_ck_ars);
    else
      CHECK(cls == SchemeClass::type_a);
  }
}

TEST_CASE("ARS222 gamma/delta resolve to the stated closed forms") {
  auto t = builtin_tableau<double>("ARS222");
  const double gamma = 1.0 - 1.0 / std::sqrt(2.0);
  const double delta = 1.0 - 1.0 / (2.0 * gamma);
  CHECK(t.a_implicit(1, 1) == Catch::Approx(gamma).epsilon(0));
  CHECK(t.a_explicit(2, 0) == Catch::Approx(delta).epsilon(0));
  CHECK(t.c_implicit[2] == Catch::Approx(1.0).margin(1e-15));
}

TEST_CASE("degenerate zero tableau is valid but not GSA") {
  DoubleButcherTableau<double> t;
  t.name = "zero";
  t.stages = 1;
  t.a_explicit = MatrixXd::Zero(1, 1);
  t.a_implicit = MatrixXd::Zero(1, 1);
  t.b_explicit = VectorXd::Zero(1);
  t.b_implicit = VectorXd::Zero(1);
  t.c_explicit = VectorXd::Zero(1);
  t.c_implicit = VectorXd::Zero(1);
  CHECK(validate(t).empty());
  CHECK_FALSE(is_gsa(t));  // c_s = 0, not 1
}

TEST_CASE("literal reading of the DP1_A242 misprint is rejected by the row-sum check") {
  auto t = builtin_tableau<double>("DP1_A242");
  // reading "1 - 3/2" literally as -1/2 makes row 4 sum to 2 while c_4 = 1
  t.a_implicit(3, 1) = 1.0 - 1.5;
  t.b_implicit[1] = 1.0 - 1.5;
  const double row_sum = t.a_implicit.row(3).sum();
  CHECK(row_sum == Catch::Approx(2.0));
  CHECK_FALSE(validate(t).empty());
  // the stored tableau keeps -3/2 so the GSA row sums to c_4 = 1
  auto good = builtin_tableau<double>("DP1_A242");
  CHECK(good.a_implicit(3, 1) == -1.5);
  CHECK(good.a_implicit.row(3).sum() == Catch::Approx(1.0));
}

TEST_CASE("classification distinguishes CK from CK-ARS") {
  DoubleButcherTableau<double> t;
  t.stages = 2;
  t.a_explicit = MatrixXd::Zero(2, 2);
  t.a_explicit(1, 0) = 1.0;
  t.a_implicit = MatrixXd::Zero(2, 2);
  t.a_implicit(1, 0) = 0.5;  // nonzero first column: CK but not CK-ARS
  t.a_implicit(1, 1) = 0.5;
  t.b_explicit = t.a_explicit.row(1).transpose();
  t.b_implicit = t.a_implicit.row(1).transpose();
  t.c_explicit = t.a_explicit.rowwise().sum();
  t.c_implicit = t.a_implicit.rowwise().sum();
  CHECK(validate(t).empty());
  CHECK(classify(t) == SchemeClass::type_ck);
}

TEST_CASE("unknown names are rejected with the available list") {
  CHECK_THROWS_WITH(builtin_tableau<double>("ARS999"), Catch::Matchers::ContainsSubstring("ARS443"));
}

TEST_CASE("DP_A121 honors the gamma >= 1/2 constraint") {
  TableauOptions<double> opt;
  opt.dp_a121_gamma = 0.25;
  CHECK_THROWS_AS(builtin_tableau<double>("DP_A121", opt), std::invalid_argument);
  opt.dp_a121_gamma = 0.5;
  auto t = builtin_tableau<double>("DP_A121", opt);
  CHECK(validate(t).empty());
  CHECK(is_gsa(t));
}

TEST_CASE("user tableaux round-trip through the key-value file format") {
  const std::string text = R"(
name = midpoint_pair
s = 2
a_explicit = 0 0  1 0
a_implicit = 0.5 0  0.5 0.5
b_explicit = 1 0
b_implicit = 0.5 0.5
)";
  auto t = parse_tableau(text);
  CHECK(t.name == "midpoint_pair");
  CHECK(t.stages == 2);
  CHECK(t.c_implicit[0] == 0.5);  // derived from row sums when absent
  CHECK(validate(t).empty());
}
