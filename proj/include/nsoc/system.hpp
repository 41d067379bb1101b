#pragma once

// Control-affine system assembly and trajectory integration with
// switching-aware stepping.

#include <optional>
#include <string>
#include <vector>

#include "nsoc/expr.hpp"
#include "nsoc/field.hpp"
#include "nsoc/ode.hpp"

namespace nsoc {

/// Axis-aligned control box; entries may be ±inf for unbounded sides.
struct Box {
  std::vector<double> lower, upper;

  int dim() const { return int(lower.size()); }

  bool contains(const Vec& u, double margin = 0.0) const {
    for (int i = 0; i < dim(); ++i)
      if (u[i] < lower[i] - margin || u[i] > upper[i] + margin) return false;
    return true;
  }

  /// Distance from u to the box complement: positive iff strictly interior.
  double interior_margin(const Vec& u) const {
    double m = std::numeric_limits<double>::infinity();
    for (int i = 0; i < dim(); ++i) {
      m = std::min(m, u[i] - lower[i]);
      m = std::min(m, upper[i] - u[i]);
    }
    return m;
  }
};

struct ControlPiece {
  double t0, t1;
  std::vector<Expr> value;  // expressions in t (slot 0)
};

/// Piecewise-analytic control on [0, T].
class Control {
 public:
  Control() = default;
  Control(int channels, std::vector<ControlPiece> pieces)
      : m_(channels), pieces_(std::move(pieces)) {}

  static Control constant(int channels, const Vec& value, double T) {
    std::vector<Expr> v;
    for (int i = 0; i < channels; ++i) v.push_back(Expr::constant(value[i], 0));
    return Control(channels, {{0.0, T, std::move(v)}});
  }

  static Control from_strings(int channels, const std::vector<std::string>& exprs, double T) {
    std::vector<Expr> v;
    for (const auto& s : exprs) v.push_back(Expr::parse(s, 0));
    if (int(v.size()) != channels) throw std::invalid_argument("Control: channel count mismatch");
    return Control(channels, {{0.0, T, std::move(v)}});
  }

  int channels() const { return m_; }
  double horizon() const { return pieces_.empty() ? 0.0 : pieces_.back().t1; }
  const std::vector<ControlPiece>& pieces() const { return pieces_; }

  Vec operator()(double t) const {
    const ControlPiece& p = piece_at(t);
    Vec u(m_);
    double slot[1] = {t};
    for (int i = 0; i < m_; ++i) u[i] = p.value[i](slot);
    return u;
  }

  std::vector<double> breakpoints() const {
    std::vector<double> b;
    for (const auto& p : pieces_) {
      b.push_back(p.t0);
      b.push_back(p.t1);
    }
    std::sort(b.begin(), b.end());
    b.erase(std::unique(b.begin(), b.end(),
                        [](double a, double c) { return std::fabs(a - c) < 1e-14; }),
            b.end());
    return b;
  }

  /// Replaces the window [a,b] with `replacement` expressions; outside pieces
  /// are clipped. Used by needle variations.
  Control with_window_replaced(double a, double b, const std::vector<Expr>& replacement) const {
    std::vector<ControlPiece> out = clip_outside(a, b);
    out.push_back({a, b, replacement});
    std::sort(out.begin(), out.end(),
              [](const ControlPiece& x, const ControlPiece& y) { return x.t0 < y.t0; });
    return Control(m_, std::move(out));
  }

  /// Adds `addend` (per channel, expressions in t) on the window [a,b].
  Control with_window_added(double a, double b, const std::vector<Expr>& addend) const {
    std::vector<ControlPiece> out = clip_outside(a, b);
    for (const auto& p : pieces_) {
      double lo = std::max(p.t0, a), hi = std::min(p.t1, b);
      if (hi - lo <= 1e-15) continue;
      std::vector<Expr> v;
      for (int i = 0; i < m_; ++i) v.push_back(p.value[i] + addend[i]);
      out.push_back({lo, hi, std::move(v)});
    }
    std::sort(out.begin(), out.end(),
              [](const ControlPiece& x, const ControlPiece& y) { return x.t0 < y.t0; });
    return Control(m_, std::move(out));
  }

  /// Times at which the control leaves the box (sampled): reported as
  /// warnings, not errors — large-amplitude variations may exit U.
  std::vector<std::string> box_warnings(const Box& box, int samples = 400) const {
    std::vector<std::string> warnings;
    double T = horizon();
    double worst = 0.0, worst_t = 0.0;
    for (int k = 0; k <= samples; ++k) {
      double t = T * k / samples;
      Vec u = (*this)(t);
      for (int i = 0; i < m_; ++i) {
        double excess = std::max(box.lower[i] - u[i], u[i] - box.upper[i]);
        if (excess > worst) {
          worst = excess;
          worst_t = t;
        }
      }
    }
    if (worst > 0)
      warnings.push_back("control exits the box by " + std::to_string(worst) + " near t=" +
                         std::to_string(worst_t));
    return warnings;
  }

 private:
  int m_ = 0;
  std::vector<ControlPiece> pieces_;

  const ControlPiece& piece_at(double t) const {
    for (const auto& p : pieces_)
      if (t < p.t1 || &p == &pieces_.back()) return p;
    throw std::logic_error("Control: empty piece list");
  }

  std::vector<ControlPiece> clip_outside(double a, double b) const {
    std::vector<ControlPiece> out;
    for (const auto& p : pieces_) {
      if (p.t1 <= a + 1e-15 || p.t0 >= b - 1e-15) {
        out.push_back(p);
        continue;
      }
      if (p.t0 < a - 1e-15) out.push_back({p.t0, a, p.value});
      if (p.t1 > b + 1e-15) out.push_back({b, p.t1, p.value});
    }
    return out;
  }
};

struct ControlAffineSystem {
  PiecewiseField drift;                    // f
  std::vector<PiecewiseField> controlled;  // g_1..g_m
  Box box;
  int n = 0;

  int m() const { return int(controlled.size()); }

  void validate() const {
    if (drift.dim() != n || drift.out_dim() != n)
      throw std::invalid_argument("system: drift dimension mismatch");
    if (controlled.empty()) throw std::invalid_argument("system: need m >= 1 controlled fields");
    for (const auto& g : controlled)
      if (g.dim() != n || g.out_dim() != n)
        throw std::invalid_argument("system: controlled field dimension mismatch");
    if (box.dim() != m()) throw std::invalid_argument("system: control box dimension mismatch");
  }

  Vec rhs(const Vec& x, const Vec& u) const {
    Vec v = drift(x);
    for (int i = 0; i < m(); ++i) v += u[i] * controlled[i](x);
    return v;
  }

  std::vector<EventFn> switch_events() const {
    std::vector<EventFn> out;
    auto add = [&](const PiecewiseField& F) {
      for (const Expr& sigma : F.switch_functions()) {
        out.push_back([sigma, n = n](double, const Vec& x) {
          return sigma.eval_state(std::vector<double>(x.data(), x.data() + n));
        });
      }
    };
    add(drift);
    for (const auto& g : controlled) add(g);
    return out;
  }
};

inline double hamiltonian(const ControlAffineSystem& sys, const Vec& x, const Vec& p,
                          const Vec& u) {
  return p.dot(sys.rhs(x, u));
}

struct Trajectory {
  OdePath path;
  std::vector<double> mesh;
  std::vector<Vec> states;

  Vec at(double t) const { return path.at(t); }
  const Vec& end_state() const { return path.end_state(); }
  double max_interp_error() const {
    double worst = 0.0;
    for (const auto& s : path.steps) worst = std::max(worst, s.interp_error_estimate());
    return worst;
  }
};

inline Trajectory integrate_trajectory(const ControlAffineSystem& sys, const Control& u,
                                       const Vec& x0, double T, double tol = 1e-10) {
  OdeOptions opt;
  opt.rtol = tol;
  opt.atol = tol * 1e-2;
  Rhs rhs = [&sys, &u](double t, const Vec& x) { return sys.rhs(x, u(t)); };
  std::vector<double> brk = u.breakpoints();
  OdePath p = integrate_ode(rhs, 0.0, T, x0, opt, sys.switch_events(), brk);
  Trajectory traj;
  traj.mesh = p.mesh();
  traj.states.reserve(traj.mesh.size());
  traj.states.push_back(p.steps.front().x0);
  for (const auto& s : p.steps) traj.states.push_back(s.x1);
  traj.path = std::move(p);
  return traj;
}

}  // namespace nsoc
