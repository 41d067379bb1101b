#include <catch2/catch_amalgamated.hpp>

#include "nsoc/bracket.hpp"
#include "nsoc/mollify.hpp"

using namespace nsoc;

namespace {
Vec v1(double a) {
  Vec v(1);
  v << a;
  return v;
}
Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}
Vec v3(double a, double b, double c) {
  Vec v(3);
  v << a, b, c;
  return v;
}

PiecewiseField abs_x1_1d() {
  Expr sw = Expr::parse("x1", 1);
  return PiecewiseField(1, 1,
                        {{{SignCondition{sw, -1}}, {Expr::parse("-x1", 1)}},
                         {{SignCondition{sw, +1}}, {Expr::parse("x1", 1)}}},
                        Regularity::C0_1);
}

PiecewiseField abs_field_2d() {
  Expr sw = Expr::parse("x1", 2);
  return PiecewiseField(2, 2,
                        {{{SignCondition{sw, -1}}, {Expr::parse("0", 2), Expr::parse("-x1", 2)}},
                         {{SignCondition{sw, +1}}, {Expr::parse("0", 2), Expr::parse("x1", 2)}}},
                        Regularity::C0_1);
}

PiecewiseField example_drift3() {
  Expr sw = Expr::parse("x1", 3);
  return PiecewiseField(
      3, 3,
      {{{SignCondition{sw, -1}}, {Expr::parse("0", 3), Expr::parse("1.5*x1^2", 3), Expr::parse("1", 3)}},
       {{SignCondition{sw, +1}}, {Expr::parse("0", 3), Expr::parse("x1^2", 3), Expr::parse("1", 3)}}},
      Regularity::C1_1);
}
}  // namespace

TEST_CASE("bump kernel: normalization and support") {
  // The evaluator normalizes its own rule's discrete mass to exactly 1; the
  // cross-check compares that rule's raw mass against a near-exact radial
  // reference. 1e−6 is reached from 25 nodes/axis; the 17-node default is
  // within 5e−6.
  for (int dim = 1; dim <= 3; ++dim) {
    CHECK(std::fabs(kernel_mass_cross_check(dim, 25) - 1.0) <= 1e-6);
    CHECK(std::fabs(kernel_mass_cross_check(dim, 41) - 1.0) <= 1e-6);
    CHECK(std::fabs(kernel_mass_cross_check(dim, 17) - 1.0) <= 5e-6);
  }
  CHECK(detail_mollify::bump_raw(1.0) == 0.0);
  CHECK(detail_mollify::bump_raw(1.7) == 0.0);
  CHECK(detail_mollify::bump_raw(0.99) > 0.0);
}

TEST_CASE("mollified constant field equals the constant") {
  auto F = PiecewiseField::smooth(2, {"3", "-1"});
  for (double eta : {0.5, 0.1, 0.01}) {
    auto Fe = mollify(F, {eta, 17});
    CHECK((Fe(v2(0.2, -0.7)) - v2(3, -1)).norm() <= 1e-13);
  }
}

TEST_CASE("mollified |x1| at the kink: positive, decreasing to zero") {
  auto F = abs_x1_1d();
  // Independent 1-D quadrature oracle on a fine trapezoid grid.
  auto oracle = [](double eta) {
    const int N = 200000;
    double total = 0.0, mass = 0.0;
    for (int k = 0; k <= N; ++k) {
      double t = -1.0 + 2.0 * k / N;
      double w = (k == 0 || k == N) ? 0.5 : 1.0;
      double kb = detail_mollify::bump_raw(t * t);
      mass += w * kb;
      total += w * kb * std::fabs(eta * t);
    }
    return total / mass;
  };
  double prev = 1e9;
  for (double eta : {0.4, 0.2, 0.1, 0.05}) {
    auto Fe = mollify(F, {eta, 17});
    double val = Fe(v1(0.0))[0];
    CHECK(val > 0.0);
    CHECK(val == Catch::Approx(oracle(eta)).margin(1e-6));
    CHECK(val < prev);
    prev = val;
  }
}

TEST_CASE("worked-example drift mollified at the origin") {
  auto f = example_drift3();
  double prev = 1e9;
  for (double eta : {0.4, 0.2, 0.1}) {
    auto fe = mollify(f, {eta, 9});
    double second = fe(v3(0, 0, 0))[1];
    CHECK(second > 0.0);
    CHECK(second < 1.5 * eta * eta);  // |f²| ≤ 1.5 x1² ≤ 1.5 η² on the ball
    CHECK(second < prev);
    prev = second;
  }
}

TEST_CASE("quadrature budget: dimension > 3 is rejected") {
  auto F = PiecewiseField::smooth(4, {"0", "0", "0", "0"});
  CHECK_THROWS_AS(mollify(F, {0.1, 9}), QuadratureBudgetExceeded);
}

TEST_CASE("quadrature Jacobian of a mollified smooth field") {
  auto F = PiecewiseField::smooth(2, {"x1^2", "x1*x2"});
  auto Fe = mollify(F, {0.05, 17});
  Vec x = v2(0.4, -0.3);
  Mat J = Fe.jacobian(x);
  auto Jexact = F.jacobian(x);
  REQUIRE(Jexact);
  // For quadratics, X_η = X + c·η² and DX_η = DX exactly (odd moments vanish).
  CHECK((J - *Jexact).norm() <= 1e-8);
}

TEST_CASE("step-2 mollification consistency at the pinned point") {
  // |[X_η,Y_η](x) − ([X,Y])_η(x)| at x = 0.3, non-increasing over the schedule.
  auto X = PiecewiseField::smooth(2, {"1", "0"});
  auto Y = abs_field_2d();
  auto W = bracket_field(X, Y);
  Vec x = v2(0.3, 0.0);
  double prev = 1e9;
  for (double eta : {0.2, 0.1, 0.05, 0.025}) {
    auto Xe = mollify(X, {eta, 17});
    auto Ye = mollify(Y, {eta, 17});
    auto We = mollify(W, {eta, 17});
    double err = (mollified_bracket(Xe, Ye, x) - We(x)).norm();
    CHECK(err <= prev + 1e-4);
    prev = err;
  }
}

TEST_CASE("step-2 consistency with a genuinely varying partner field") {
  // X¹ depends on x1, so the commutator defect does not vanish by kernel
  // parity; it must still shrink along the η schedule.
  auto X = PiecewiseField::smooth(2, {"x1", "1"});
  auto Y = abs_field_2d();
  auto W = bracket_field(X, Y);
  Vec x = v2(0.05, 0.2);
  std::vector<double> errs;
  for (double eta : {0.2, 0.1, 0.05, 0.025}) {
    auto Xe = mollify(X, {eta, 17});
    auto Ye = mollify(Y, {eta, 17});
    auto We = mollify(W, {eta, 17});
    errs.push_back((mollified_bracket(Xe, Ye, x) - We(x)).norm());
  }
  CHECK(errs.front() > 1e-3);  // the defect is genuine at the coarsest η
  for (std::size_t k = 1; k < errs.size(); ++k) CHECK(errs[k] <= errs[k - 1] + 1e-4);
  CHECK(errs.back() <= 1e-4);
}

TEST_CASE("step-3 mollification consistency") {
  // X, Y single-piece C²; Z = |x1| ∂/∂x2.
  auto X = PiecewiseField::smooth(2, {"x2", "-x1"});
  auto Y = PiecewiseField::smooth(2, {"x1^2", "x2^2"});
  auto Z = abs_field_2d();
  auto W = bracket_field(X, Y);        // smooth
  auto WZ = bracket_field(W, Z);       // [[X,Y],Z], piecewise
  Vec x = v2(0.05, 0.2);
  std::vector<double> errs;
  for (double eta : {0.2, 0.1, 0.05, 0.025}) {
    auto Xe = mollify(X, {eta, 17});
    auto Ye = mollify(Y, {eta, 17});
    auto Ze = mollify(Z, {eta, 17});
    auto WZe = mollify(WZ, {eta, 17});
    errs.push_back((mollified_bracket3(Xe, Ye, Ze, x) - WZe(x)).norm());
  }
  for (std::size_t k = 1; k < errs.size(); ++k) CHECK(errs[k] <= errs[k - 1] + 1e-4);
}
