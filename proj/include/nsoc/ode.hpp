#pragma once

// Dormand–Prince 5(4) with PI step control, cubic-Hermite dense output,
// forced breakpoints, and event detection on switch functions. The right-hand
// sides here are only piecewise-smooth; naive stepping across a switching
// surface loses order, so accepted steps are split at detected sign changes
// (bisection on the dense output).

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "nsoc/hull.hpp"

namespace nsoc {

struct BlowUpError : std::runtime_error {
  double at_time;
  BlowUpError(double t, const std::string& msg) : std::runtime_error(msg), at_time(t) {}
};

struct OdeOptions {
  double rtol = 1e-10;
  double atol = 1e-12;
  double initial_step = 0.0;  // 0 = automatic
  double state_bound = 1e8;
  double event_time_tol = 1e-12;
  long max_steps = 2000000;
};

struct OdeStats {
  long accepted = 0;
  long rejected = 0;
  long rhs_evals = 0;
  long events_located = 0;
};

struct StepRecord {
  double t0, t1;
  Vec x0, f0, x1, f1;

  /// Cubic Hermite interpolant on [t0, t1].
  Vec at(double t) const {
    double h = t1 - t0;
    if (h == 0.0) return x0;
    double s = (t - t0) / h;
    double s2 = s * s, s3 = s2 * s;
    double h00 = 2 * s3 - 3 * s2 + 1;
    double h10 = s3 - 2 * s2 + s;
    double h01 = -2 * s3 + 3 * s2;
    double h11 = s3 - s2;
    return h00 * x0 + (h10 * h) * f0 + h01 * x1 + (h11 * h) * f1;
  }

  /// Local interpolation error estimate: defect of the Hermite cubic against
  /// the RK solution scale, O(h⁴).
  double interp_error_estimate() const {
    return 0.5 * std::pow(std::fabs(t1 - t0), 4) * std::max((f1 - f0).norm(), 1e-30);
  }
};

struct OdePath {
  std::vector<StepRecord> steps;
  OdeStats stats;
  double t_begin = 0, t_end = 0;

  Vec at(double t) const {
    if (steps.empty()) throw std::logic_error("OdePath::at: empty path");
    if (t <= steps.front().t0) return steps.front().x0;
    if (t >= steps.back().t1) return steps.back().x1;
    std::size_t lo = 0, hi = steps.size() - 1;
    while (lo < hi) {
      std::size_t mid = (lo + hi) / 2;
      if (steps[mid].t1 < t)
        lo = mid + 1;
      else
        hi = mid;
    }
    return steps[lo].at(t);
  }

  const Vec& end_state() const { return steps.back().x1; }

  std::vector<double> mesh() const {
    std::vector<double> m;
    m.reserve(steps.size() + 1);
    if (!steps.empty()) m.push_back(steps.front().t0);
    for (const auto& s : steps) m.push_back(s.t1);
    return m;
  }
};

using Rhs = std::function<Vec(double, const Vec&)>;
using EventFn = std::function<double(double, const Vec&)>;

namespace detail_ode {

// Dormand–Prince coefficients.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
constexpr double e1 = 35.0 / 384 - 5179.0 / 57600, e3 = 500.0 / 1113 - 7571.0 / 16695,
                 e4 = 125.0 / 192 - 393.0 / 640, e5 = -2187.0 / 6784 + 92097.0 / 339200,
                 e6 = 11.0 / 84 - 187.0 / 2100, e7 = -1.0 / 40;

}  // namespace detail_ode

/// Integrates ẋ = rhs(t, x) from t0 to t1 (t0 < t1). Steps never cross a
/// forced breakpoint, and accepted steps are truncated at event sign changes.
inline OdePath integrate_ode(const Rhs& rhs, double t0, double t1, const Vec& x0,
                             const OdeOptions& opt = {}, const std::vector<EventFn>& events = {},
                             std::vector<double> breakpoints = {}) {
  using namespace detail_ode;
  if (!(t1 > t0)) {
    OdePath trivial;
    trivial.t_begin = t0;
    trivial.t_end = t0;
    StepRecord r{t0, t0, x0, Vec::Zero(x0.size()), x0, Vec::Zero(x0.size())};
    trivial.steps.push_back(std::move(r));
    return trivial;
  }
  std::sort(breakpoints.begin(), breakpoints.end());

  OdePath path;
  path.t_begin = t0;
  path.t_end = t1;

  double t = t0;
  Vec x = x0;
  Vec f = rhs(t, x);
  path.stats.rhs_evals++;

  double h = opt.initial_step > 0 ? opt.initial_step : (t1 - t0) / 100.0;
  const double hmin = (t1 - t0) * 1e-14;

  auto next_breakpoint = [&](double from) {
    for (double b : breakpoints)
      if (b > from + hmin && b < t1) return b;
    return t1;
  };

  while (t < t1 - hmin) {
    if (path.stats.accepted + path.stats.rejected > opt.max_steps)
      throw std::runtime_error("integrate_ode: step budget exhausted");
    double cap = next_breakpoint(t);
    if (t + h >= cap) h = cap - t;
    if (h < hmin) h = hmin;

    Vec k1 = f;
    Vec k2 = rhs(t + c2 * h, x + h * (a21 * k1));
    Vec k3 = rhs(t + c3 * h, x + h * (a31 * k1 + a32 * k2));
    Vec k4 = rhs(t + c4 * h, x + h * (a41 * k1 + a42 * k2 + a43 * k3));
    Vec k5 = rhs(t + c5 * h, x + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
    Vec k6 = rhs(t + h, x + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
    Vec x5 = x + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    Vec k7 = rhs(t + h, x5);
    path.stats.rhs_evals += 6;

    Vec errv = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    double err = 0.0;
    for (int i = 0; i < x.size(); ++i) {
      double sc = opt.atol + opt.rtol * std::max(std::fabs(x[i]), std::fabs(x5[i]));
      err += std::pow(errv[i] / sc, 2);
    }
    err = std::sqrt(err / x.size());

    if (err > 1.0 && h > hmin * 2) {
      path.stats.rejected++;
      h *= std::max(0.2, 0.9 * std::pow(err, -0.2));
      continue;
    }

    StepRecord rec{t, t + h, x, k1, x5, k7};

    // Event location: earliest strict sign change of any switch function.
    double t_event = -1.0;
    if (!events.empty()) {
      const double zero_tol = 1e-11;
      for (const auto& ev : events) {
        double e0 = ev(rec.t0, rec.x0);
        double eend = ev(rec.t1, rec.x1);
        double emid = ev(0.5 * (rec.t0 + rec.t1), rec.at(0.5 * (rec.t0 + rec.t1)));
        if (std::fabs(e0) <= zero_tol) continue;  // starting on/leaving the surface
        double lo = rec.t0, hi = -1.0;
        double elo = e0;
        if (e0 * emid < 0 && std::fabs(emid) > zero_tol)
          hi = 0.5 * (rec.t0 + rec.t1);
        else if (e0 * eend < 0 && std::fabs(eend) > zero_tol) {
          lo = 0.5 * (rec.t0 + rec.t1);
          elo = emid;
          hi = rec.t1;
        }
        if (hi < 0) continue;
        for (int it = 0; it < 200 && hi - lo > opt.event_time_tol * std::max(1.0, std::fabs(hi));
             ++it) {
          double mid = 0.5 * (lo + hi);
          double em = ev(mid, rec.at(mid));
          if (elo * em <= 0)
            hi = mid;
          else {
            lo = mid;
            elo = em;
          }
        }
        double tc = 0.5 * (lo + hi);
        if (tc > rec.t0 + hmin && (t_event < 0 || tc < t_event)) t_event = tc;
      }
    }

    if (t_event > 0 && t_event < rec.t1 - hmin) {
      // Redo the step up to the crossing; the RHS is smooth on that side.
      path.stats.rejected++;
      path.stats.events_located++;
      h = t_event - t;
      continue;
    }

    path.stats.accepted++;
    path.steps.push_back(rec);
    t = rec.t1;
    x = rec.x1;
    f = k7;  // FSAL
    if (x.norm() > opt.state_bound)
      throw BlowUpError(t, "integrate_ode: state norm exceeded bound before end time");
    h *= std::min(5.0, std::max(0.2, 0.9 * std::pow(std::max(err, 1e-10), -0.2)));
  }
  return path;
}

}  // namespace nsoc
