#pragma once

// Vector fields (and scalar costs) with explicit nonsmoothness structure:
// finitely many analytic pieces glued along switch surfaces {σ = 0}. Limits
// over differentiability points are then computable by branch enumeration:
// the limit of an analytic piece formula along its region is the formula
// itself, evaluated at the base point.

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "nsoc/expr.hpp"
#include "nsoc/hull.hpp"

namespace nsoc {

enum class Regularity { C0_1, C1_1, C2 };

inline std::string to_string(Regularity r) {
  switch (r) {
    case Regularity::C0_1: return "C0_1";
    case Regularity::C1_1: return "C1_1";
    case Regularity::C2: return "C2";
  }
  return "?";
}

inline Regularity regularity_from_string(const std::string& s) {
  if (s == "C0_1") return Regularity::C0_1;
  if (s == "C1_1") return Regularity::C1_1;
  if (s == "C2") return Regularity::C2;
  throw std::invalid_argument("unknown regularity tag: " + s);
}

/// Region condition sign·σ(x) ≥ 0 (closure semantics).
struct SignCondition {
  Expr switch_fn;
  int sign = 1;  // +1 or −1
};

struct FieldPiece {
  std::vector<SignCondition> region;          // empty ⇒ whole space
  std::vector<Expr> value;                    // out_dim components
  std::vector<std::vector<Expr>> jac;         // [i][k] = ∂value_i/∂x_k
  std::vector<std::vector<std::vector<Expr>>> hess;  // [i][k][l]
};

struct DegenerateSampling : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct RegularityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SamplingConfig {
  std::vector<double> radii = {1e-2, 1e-3, 1e-4, 1e-5};
  int samples_per_level = 64;
  std::uint64_t seed = 20240517u;
  double surface_tol = 1e-12;  // |σ(x)| below this counts as "on the surface"
};

class PiecewiseField {
 public:
  PiecewiseField() = default;

  /// Builds a field from per-piece value expressions; Jacobians and Hessians
  /// are generated by symbolic differentiation.
  PiecewiseField(int state_dim, int out_dim,
                 std::vector<std::pair<std::vector<SignCondition>, std::vector<Expr>>> pieces,
                 Regularity reg = Regularity::C0_1)
      : n_(state_dim), out_(out_dim), reg_(reg) {
    for (auto& [region, value] : pieces) {
      if (int(value.size()) != out_)
        throw std::invalid_argument("PiecewiseField: component count mismatch");
      FieldPiece p;
      p.region = std::move(region);
      p.value = std::move(value);
      p.jac.resize(out_);
      p.hess.resize(out_);
      for (int i = 0; i < out_; ++i) {
        p.jac[i].resize(n_);
        p.hess[i].resize(n_);
        for (int k = 0; k < n_; ++k) p.jac[i][k] = p.value[i].derivative(k);
        for (int k = 0; k < n_; ++k) {
          p.hess[i][k].resize(n_);
          for (int l = 0; l < n_; ++l) p.hess[i][k][l] = p.jac[i][k].derivative(l);
        }
      }
      pieces_.push_back(std::move(p));
    }
    if (pieces_.empty()) throw std::invalid_argument("PiecewiseField: no pieces");
  }

  /// Single-piece helper from expression strings ("x1", "1.5*x1^2", ...).
  static PiecewiseField smooth(int state_dim, const std::vector<std::string>& components,
                               Regularity reg = Regularity::C2) {
    std::vector<Expr> value;
    for (const auto& s : components) value.push_back(Expr::parse(s, state_dim));
    return PiecewiseField(state_dim, int(components.size()), {{{}, std::move(value)}}, reg);
  }

  int dim() const { return n_; }
  int out_dim() const { return out_; }
  Regularity regularity() const { return reg_; }
  const std::vector<FieldPiece>& pieces() const { return pieces_; }
  bool single_piece() const { return pieces_.size() == 1; }

  /// Indices of pieces whose closed region contains x.
  std::vector<int> pieces_at(const Vec& x, double tol = 1e-12) const {
    std::vector<int> out;
    for (int k = 0; k < int(pieces_.size()); ++k) {
      bool inside = true;
      for (const auto& cond : pieces_[k].region) {
        double s = cond.switch_fn.eval_state(std::vector<double>(x.data(), x.data() + n_));
        if (cond.sign * s < -tol * std::max(1.0, x.norm())) {
          inside = false;
          break;
        }
      }
      if (inside) out.push_back(k);
    }
    return out;
  }

  Vec eval_piece(int k, const Vec& x) const {
    Vec v(out_);
    std::vector<double> slots(n_ + 1, 0.0);
    for (int i = 0; i < n_; ++i) slots[i] = x[i];
    for (int i = 0; i < out_; ++i) v[i] = pieces_[k].value[i](slots.data());
    return v;
  }

  Mat jac_piece(int k, const Vec& x) const {
    Mat J(out_, n_);
    std::vector<double> slots(n_ + 1, 0.0);
    for (int i = 0; i < n_; ++i) slots[i] = x[i];
    for (int i = 0; i < out_; ++i)
      for (int c = 0; c < n_; ++c) J(i, c) = pieces_[k].jac[i][c](slots.data());
    return J;
  }

  /// Hessian contraction direction-free: returns the full tensor flattened per
  /// component: H[i] is the n×n matrix of second partials of component i.
  std::vector<Mat> hess_piece(int k, const Vec& x) const {
    std::vector<Mat> H(out_, Mat(n_, n_));
    std::vector<double> slots(n_ + 1, 0.0);
    for (int i = 0; i < n_; ++i) slots[i] = x[i];
    for (int i = 0; i < out_; ++i)
      for (int a = 0; a < n_; ++a)
        for (int b = 0; b < n_; ++b) H[i](a, b) = pieces_[k].hess[i][a][b](slots.data());
    return H;
  }

  /// Field value. Total: on switch surfaces any adjacent piece may be used
  /// (the continuity invariant makes them agree).
  Vec operator()(const Vec& x) const {
    auto ks = pieces_at(x);
    if (ks.empty()) throw std::logic_error("PiecewiseField: region predicates do not cover x");
    return eval_piece(ks.front(), x);
  }

  /// Analytic Jacobian where defined; nullopt when x sits on a surface whose
  /// adjacent pieces disagree there (NotDifferentiable).
  std::optional<Mat> jacobian(const Vec& x, double agree_tol = 1e-10) const {
    auto ks = pieces_at(x);
    if (ks.empty()) throw std::logic_error("PiecewiseField: region predicates do not cover x");
    Mat J = jac_piece(ks[0], x);
    double scale = std::max(1.0, J.norm());
    for (std::size_t a = 1; a < ks.size(); ++a) {
      Mat J2 = jac_piece(ks[a], x);
      if ((J2 - J).norm() > agree_tol * scale) return std::nullopt;
    }
    return J;
  }

  std::optional<std::vector<Mat>> hessian(const Vec& x, double agree_tol = 1e-8) const {
    auto ks = pieces_at(x);
    if (ks.empty()) throw std::logic_error("PiecewiseField: region predicates do not cover x");
    auto H = hess_piece(ks[0], x);
    for (std::size_t a = 1; a < ks.size(); ++a) {
      auto H2 = hess_piece(ks[a], x);
      for (int i = 0; i < out_; ++i) {
        double scale = std::max(1.0, H[i].norm());
        if ((H2[i] - H[i]).norm() > agree_tol * scale) return std::nullopt;
      }
    }
    return H;
  }

  /// Distinct switch expressions, for event detection during integration.
  std::vector<Expr> switch_functions() const {
    std::vector<Expr> out;
    std::vector<std::string> seen;
    for (const auto& p : pieces_)
      for (const auto& c : p.region) {
        std::string key = c.switch_fn.str();
        bool dup = false;
        for (const auto& s : seen) dup = dup || s == key;
        if (!dup) {
          seen.push_back(key);
          out.push_back(c.switch_fn);
        }
      }
    return out;
  }

  /// Representative (pieceX-independent) cell probes around x: returns the set
  /// of piece indices seen in small balls around x, each with a probe point.
  std::vector<std::pair<int, Vec>> adjacent_cells(const Vec& x, double radius,
                                                  std::mt19937_64& rng, int probes = 64) const {
    std::vector<std::pair<int, Vec>> reps;
    std::vector<bool> seen(pieces_.size(), false);
    std::normal_distribution<double> gauss(0.0, 1.0);
    // The piece containing x itself always counts.
    for (int k : pieces_at(x))
      if (!seen[k]) {
        seen[k] = true;
        reps.emplace_back(k, x);
      }
    for (int p = 0; p < probes; ++p) {
      Vec dir(n_);
      for (int i = 0; i < n_; ++i) dir[i] = gauss(rng);
      double nrm = dir.norm();
      if (nrm == 0) continue;
      Vec probe = x + (radius / nrm) * dir;
      auto ks = pieces_at(probe);
      if (ks.size() != 1) continue;  // want interior probes only
      if (!seen[ks[0]]) {
        seen[ks[0]] = true;
        reps.emplace_back(ks[0], probe);
      }
    }
    return reps;
  }

 private:
  int n_ = 0;
  int out_ = 0;
  Regularity reg_ = Regularity::C0_1;
  std::vector<FieldPiece> pieces_;
};

/// Validates the continuity invariant: adjacent piece values agree on sampled
/// switch-surface points (and Jacobians too, for C1_1-tagged fields).
/// Returns the worst mismatch found.
inline double validate_field_continuity(const PiecewiseField& F, double box = 1.0,
                                        int surface_samples = 50, std::uint64_t seed = 7,
                                        bool check_jacobians = false) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-box, box);
  double worst = 0.0;
  for (const Expr& sigma : F.switch_functions()) {
    int found = 0;
    for (int attempt = 0; attempt < surface_samples * 40 && found < surface_samples; ++attempt) {
      Vec a(F.dim()), b(F.dim());
      for (int i = 0; i < F.dim(); ++i) {
        a[i] = unif(rng);
        b[i] = unif(rng);
      }
      auto ev = [&](const Vec& x) {
        return sigma.eval_state(std::vector<double>(x.data(), x.data() + F.dim()));
      };
      double fa = ev(a), fb = ev(b);
      if (fa * fb > 0) continue;
      for (int it = 0; it < 80; ++it) {  // bisection onto σ = 0
        Vec m = 0.5 * (a + b);
        double fm = ev(m);
        if (fa * fm <= 0) {
          b = m;
          fb = fm;
        } else {
          a = m;
          fa = fm;
        }
      }
      Vec x = 0.5 * (a + b);
      auto ks = F.pieces_at(x, 1e-9);
      for (std::size_t p = 0; p < ks.size(); ++p)
        for (std::size_t q = p + 1; q < ks.size(); ++q) {
          worst = std::max(worst, (F.eval_piece(ks[p], x) - F.eval_piece(ks[q], x)).norm());
          if (check_jacobians)
            worst = std::max(worst, (F.jac_piece(ks[p], x) - F.jac_piece(ks[q], x)).norm());
        }
      ++found;
    }
  }
  return worst;
}

}  // namespace nsoc
