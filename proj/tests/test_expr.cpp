#include <catch2/catch_amalgamated.hpp>

#include "nsoc/expr.hpp"

using nsoc::Expr;

TEST_CASE("expression parsing and evaluation") {
  auto e = Expr::parse("1.5*x1^2 + x2/2 - 3", 2);
  double slots[3] = {2.0, 4.0, 0.0};
  CHECK(e(slots) == Catch::Approx(1.5 * 4 + 2 - 3));

  auto t = Expr::parse("t^3 - 2*t", 0);
  double ts[1] = {2.0};
  CHECK(t(ts) == Catch::Approx(8 - 4));

  auto a = Expr::parse("abs(x1 - 1)", 1);
  double s1[2] = {0.25, 0.0};
  CHECK(a(s1) == Catch::Approx(0.75));

  auto neg = Expr::parse("-x1^2", 1);
  double s2[2] = {3.0, 0.0};
  CHECK(neg(s2) == Catch::Approx(-9.0));  // unary minus binds below ^

  auto np = Expr::parse("(x1+1)^-2", 1);
  double s3[2] = {1.0, 0.0};
  CHECK(np(s3) == Catch::Approx(0.25));
}

TEST_CASE("symbolic derivatives match finite differences") {
  auto e = Expr::parse("x1^3*x2 - x2^2/(x1+2) + abs(x2)*x1", 2);
  auto d0 = e.derivative(0);
  auto d1 = e.derivative(1);
  double x[3] = {0.7, -1.3, 0.0};
  const double h = 1e-6;
  for (int var = 0; var < 2; ++var) {
    double xp[3] = {x[0], x[1], 0.0};
    double xm[3] = {x[0], x[1], 0.0};
    xp[var] += h;
    xm[var] -= h;
    double fd = (e(xp) - e(xm)) / (2 * h);
    double an = (var == 0 ? d0 : d1)(x);
    CHECK(an == Catch::Approx(fd).margin(1e-7));
  }
}

TEST_CASE("second derivatives via repeated differentiation") {
  auto e = Expr::parse("x1^4 + x1^2*x2", 2);
  auto d00 = e.derivative(0).derivative(0);
  double x[3] = {1.5, 2.0, 0.0};
  CHECK(d00(x) == Catch::Approx(12 * 1.5 * 1.5 + 2 * 2.0));
}

TEST_CASE("parse errors carry positions; unknown symbols are rejected") {
  CHECK_THROWS_AS(Expr::parse("x1 +", 1), nsoc::ExprParseError);
  CHECK_THROWS_AS(Expr::parse("x3", 2), nsoc::ExprParseError);
  CHECK_THROWS_AS(Expr::parse("sin(x1)", 1), nsoc::UnsupportedExpression);
  CHECK_THROWS_AS(Expr::parse("", 1), nsoc::ExprParseError);
}

TEST_CASE("dependency tracking") {
  auto e = Expr::parse("x1^2 + 1", 3);
  CHECK(e.depends_on(0));
  CHECK_FALSE(e.depends_on(1));
  CHECK_FALSE(e.depends_on(3));  // t slot
}
