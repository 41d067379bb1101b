#include <catch2/catch_amalgamated.hpp>

#include "nsoc/adjoint.hpp"
#include "nsoc/system.hpp"

using namespace nsoc;

namespace {
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

ControlAffineSystem example_system() {
  ControlAffineSystem sys;
  sys.n = 3;
  Expr sw = Expr::parse("x1", 3);
  sys.drift = PiecewiseField(
      3, 3,
      {{{SignCondition{sw, -1}}, {Expr::parse("0", 3), Expr::parse("1.5*x1^2", 3), Expr::parse("1", 3)}},
       {{SignCondition{sw, +1}}, {Expr::parse("0", 3), Expr::parse("x1^2", 3), Expr::parse("1", 3)}}},
      Regularity::C1_1);
  sys.controlled = {PiecewiseField::smooth(3, {"1", "0", "0"})};
  sys.box = {{-1}, {1}};
  sys.validate();
  return sys;
}

// Series matrix exponential, test-only oracle.
Mat expm_oracle(const Mat& A) {
  Mat acc = Mat::Identity(A.rows(), A.cols());
  Mat term = acc;
  for (int k = 1; k <= 60; ++k) {
    term = term * A / double(k);
    acc += term;
  }
  return acc;
}
}  // namespace

TEST_CASE("worked-example trajectory with the zero control") {
  auto sys = example_system();
  Control u = Control::constant(1, Vec::Zero(1), 4.0);
  auto traj = integrate_trajectory(sys, u, v3(0, 0, -4), 4.0, 1e-10);
  CHECK((traj.end_state() - v3(0, 0, 0)).norm() <= 1e-10);
  CHECK((traj.at(1.5) - v3(0, 0, -2.5)).norm() <= 1e-10);
  CHECK(traj.mesh.front() == 0.0);
  CHECK(traj.mesh.back() == 4.0);
}

TEST_CASE("worked-example trajectory with a positive constant control") {
  auto sys = example_system();
  const double ut = 0.5;
  Control u = Control::constant(1, ut * Vec::Ones(1), 4.0);
  auto traj = integrate_trajectory(sys, u, v3(0, 0, -4), 4.0, 1e-11);
  // Closed form on the x1 >= 0 branch: x1 = ut·t, x2 = ut²t³/3, x3 = −4 + t.
  for (double t : {1.0, 2.5, 4.0}) {
    Vec expect = v3(ut * t, ut * ut * t * t * t / 3.0, -4 + t);
    CHECK((traj.at(t) - expect).norm() <= 1e-8);
  }
}

TEST_CASE("zero dynamics gives a constant trajectory") {
  ControlAffineSystem sys;
  sys.n = 2;
  sys.drift = PiecewiseField::smooth(2, {"0", "0"});
  sys.controlled = {PiecewiseField::smooth(2, {"0", "0"})};
  sys.box = {{-1}, {1}};
  Control u = Control::constant(1, Vec::Ones(1), 1.0);
  auto traj = integrate_trajectory(sys, u, v2(3, -7), 1.0);
  CHECK((traj.end_state() - v2(3, -7)).norm() == 0.0);
}

TEST_CASE("blow-up is detected") {
  ControlAffineSystem sys;
  sys.n = 1;
  sys.drift = PiecewiseField::smooth(1, {"x1^2"});
  sys.controlled = {PiecewiseField::smooth(1, {"0"})};
  sys.box = {{-1}, {1}};
  Control u = Control::constant(1, Vec::Zero(1), 2.0);
  Vec x0(1);
  x0 << 2.0;
  CHECK_THROWS_AS(integrate_trajectory(sys, u, x0, 2.0), BlowUpError);
}

TEST_CASE("event detection restores accuracy through a kink") {
  // x1' = 1, x2' = |x1| from x1(0) = −1: x2(2) = 1 exactly.
  ControlAffineSystem sys;
  sys.n = 2;
  Expr sw = Expr::parse("x1", 2);
  sys.drift = PiecewiseField(2, 2,
                             {{{SignCondition{sw, -1}}, {Expr::parse("1", 2), Expr::parse("-x1", 2)}},
                              {{SignCondition{sw, +1}}, {Expr::parse("1", 2), Expr::parse("x1", 2)}}},
                             Regularity::C0_1);
  sys.controlled = {PiecewiseField::smooth(2, {"0", "0"})};
  sys.box = {{-1}, {1}};
  Control u = Control::constant(1, Vec::Zero(1), 2.0);
  auto traj = integrate_trajectory(sys, u, v2(-1, 0), 2.0, 1e-10);
  CHECK(traj.at(2.0)[1] == Catch::Approx(1.0).margin(1e-9));
  CHECK(traj.path.stats.events_located >= 1);
  // The crossing time t = 1 appears in the mesh.
  bool found = false;
  for (double t : traj.mesh) found = found || std::fabs(t - 1.0) < 1e-9;
  CHECK(found);
}

TEST_CASE("mesh refinement: halving the tolerance moves endpoints by <= 10x tol") {
  auto sys = example_system();
  Control u = Control::from_strings(1, {"0.2*t - 0.05*t^2"}, 4.0);
  for (double tol : {1e-8, 1e-9}) {
    auto a = integrate_trajectory(sys, u, v3(0, 0, -4), 4.0, tol);
    auto b = integrate_trajectory(sys, u, v3(0, 0, -4), 4.0, tol / 2);
    CHECK((a.end_state() - b.end_state()).norm() <= 10 * tol);
  }
}

TEST_CASE("Hamiltonian evaluation") {
  auto sys = example_system();
  Vec p = v3(0, -2, 1);
  for (double uu : {-1.0, -0.3, 0.0, 0.7, 1.0}) {
    Vec u(1);
    u << uu;
    CHECK(hamiltonian(sys, v3(0, 0, -2), p, u) == Catch::Approx(1.0).margin(1e-14));
  }
  Vec u0(1);
  u0 << 0.0;
  CHECK(hamiltonian(sys, v3(1, 0, 0), Vec::Zero(3), u0) == 0.0);
  CHECK(hamiltonian(sys, v3(1, 0, 0), p, u0) == Catch::Approx(-1.0));
}

TEST_CASE("adjoint along the worked example is constant") {
  auto sys = example_system();
  Control u = Control::constant(1, Vec::Zero(1), 4.0);
  auto traj = integrate_trajectory(sys, u, v3(0, 0, -4), 4.0, 1e-10);
  auto p = integrate_adjoint(sys, traj, u, v3(0, -2, 1), 1.0);
  REQUIRE(p.values.size() == traj.mesh.size());
  for (const auto& pv : p.values) CHECK((pv - v3(0, -2, 1)).norm() <= 1e-12);
  CHECK(p.nontrivial());
}

TEST_CASE("adjoint of a linear system matches the matrix exponential oracle") {
  // f = Ax with A = [[0,1],[-2,-0.5]]; p(t) = p(T)·e^{A(T−t)}.
  ControlAffineSystem sys;
  sys.n = 2;
  sys.drift = PiecewiseField::smooth(2, {"x2", "-2*x1 - 0.5*x2"});
  sys.controlled = {PiecewiseField::smooth(2, {"0", "0"})};
  sys.box = {{-1}, {1}};
  Control u = Control::constant(1, Vec::Zero(1), 1.5);
  auto traj = integrate_trajectory(sys, u, v2(1, 0), 1.5, 1e-11);
  Vec pT = v2(0.3, -1.2);
  auto p = integrate_adjoint(sys, traj, u, pT, 1.0, SelectionPolicy::DifferentiableSide, 1e-12);
  Mat A(2, 2);
  A << 0, 1, -2, -0.5;
  for (double t : {0.0, 0.4, 1.0}) {
    Vec expect = expm_oracle(A * (1.5 - t)).transpose() * pT;
    CHECK((p.at(t) - expect).norm() <= 1e-8);
  }
}

TEST_CASE("fundamental matrices") {
  auto zero = [](double) { return Mat::Zero(2, 2); };
  CHECK((fundamental_matrix(zero, 2, 0.0, 1.0) - Mat::Identity(2, 2)).norm() <= 1e-12);

  Mat A(2, 2);
  A << 0.2, -1.0, 0.7, 0.1;
  auto constM = [&](double) { return A; };
  Mat E = fundamental_matrix(constM, 2, 0.25, 1.75);
  CHECK((E - expm_oracle(A * 1.5)).norm() <= 1e-8);

  // Along the worked example the Jacobian selection vanishes identically.
  auto sys = example_system();
  Control u = Control::constant(1, Vec::Zero(1), 4.0);
  auto traj = integrate_trajectory(sys, u, v3(0, 0, -4), 4.0, 1e-10);
  JacobianSelection sel(sys, traj, u, SelectionPolicy::DifferentiableSide);
  Mat E2 = fundamental_matrix([&](double s) { return sel(s); }, 3, 1.0, 4.0);
  CHECK((E2 - Mat::Identity(3, 3)).norm() <= 1e-10);
}

TEST_CASE("transport consistency and variational duality") {
  // For any selection policy: p(t1)·v = p(T)·E(t1→T)·v within 1e−7, and
  // t ↦ p(t)·L(t) is constant when L solves the forward variational equation.
  ControlAffineSystem sys;
  sys.n = 2;
  sys.drift = PiecewiseField::smooth(2, {"x2", "-1.3*x1 + 0.2*x2^2"});
  sys.controlled = {PiecewiseField::smooth(2, {"1", "0"})};
  sys.box = {{-2}, {2}};
  Control u = Control::from_strings(1, {"0.3 - 0.1*t"}, 2.0);
  auto traj = integrate_trajectory(sys, u, v2(0.4, -0.2), 2.0, 1e-11);
  auto p = integrate_adjoint(sys, traj, u, v2(1.0, 0.5), 1.0, SelectionPolicy::DifferentiableSide,
                             1e-12);
  JacobianSelection sel(sys, traj, u, SelectionPolicy::DifferentiableSide);
  auto M = [&](double s) { return sel(s); };
  for (double t1 : {0.0, 0.7, 1.5}) {
    Mat E = fundamental_matrix(M, 2, t1, 2.0, 1e-12);
    for (int trial = 0; trial < 3; ++trial) {
      Vec v = Vec::Zero(2);
      v[trial % 2] = 1.0;
      if (trial == 2) v = v2(0.6, -1.1);
      CHECK(p.at(t1).dot(v) == Catch::Approx(p.at(2.0).dot(E * v)).margin(1e-7));
    }
  }
  // Duality on a grid: p(t)·L(0→t)·v constant.
  Vec v = v2(1.0, -0.5);
  double ref = p.at(0.0).dot(v);
  for (double t : {0.25, 0.8, 1.3, 2.0}) {
    Mat L = fundamental_matrix(M, 2, 0.0, t, 1e-12);
    CHECK(p.at(t).dot(L * v) == Catch::Approx(ref).margin(1e-7));
  }
}

TEST_CASE("control window surgery") {
  Control u = Control::from_strings(2, {"t", "1"}, 3.0);
  std::vector<Expr> repl = {Expr::constant(5.0, 0), Expr::constant(-5.0, 0)};
  Control nu = u.with_window_replaced(1.0, 1.5, repl);
  CHECK((nu(0.5) - v2(0.5, 1)).norm() <= 1e-14);
  CHECK((nu(1.2) - v2(5, -5)).norm() == 0.0);
  CHECK((nu(2.0) - v2(2.0, 1)).norm() <= 1e-14);

  std::vector<Expr> add = {Expr::constant(1.0, 0), Expr::parse("t", 0)};
  Control au = u.with_window_added(1.0, 2.0, add);
  CHECK((au(1.5) - v2(1.5 + 1.0, 1 + 1.5)).norm() <= 1e-14);
  CHECK((au(2.5) - v2(2.5, 1)).norm() <= 1e-14);

  Box box{{-2, -2}, {2, 2}};
  CHECK_FALSE(u.box_warnings(box).empty());  // t ranges to 3 > 2
}
