#pragma once

// Classical, set-valued, and iterated Lie brackets, plus Clarke generalized
// Jacobians. Set-valued objects are hulls of (a) deterministic one-per-branch
// representatives obtained from the explicit switching structure and (b)
// classical evaluations at random points from shrinking balls.

#include <optional>
#include <random>

#include "nsoc/field.hpp"
#include "nsoc/hull.hpp"

namespace nsoc {

/// [X,Y](x) = DY(x)·X(x) − DX(x)·Y(x); nullopt where either Jacobian is
/// unavailable.
inline std::optional<Vec> classical_bracket(const PiecewiseField& X, const PiecewiseField& Y,
                                            const Vec& x) {
  auto JX = X.jacobian(x);
  auto JY = Y.jacobian(x);
  if (!JX || !JY) return std::nullopt;
  return Vec((*JY) * X(x) - (*JX) * Y(x));
}

/// The bracket [X,Y] as a piecewise field: one piece per (piece of X, piece
/// of Y) pair, value expressions assembled symbolically. Cross pairs with
/// empty interior are harmless: interior points always select a consistent
/// pair, and on-surface evaluation goes through cell probes.
inline PiecewiseField bracket_field(const PiecewiseField& X, const PiecewiseField& Y) {
  if (X.dim() != Y.dim() || X.out_dim() != X.dim() || Y.out_dim() != Y.dim())
    throw std::invalid_argument("bracket_field: need vector fields of equal dimension");
  const int n = X.dim();
  std::vector<std::pair<std::vector<SignCondition>, std::vector<Expr>>> pieces;
  for (const auto& px : X.pieces())
    for (const auto& py : Y.pieces()) {
      std::vector<SignCondition> region = px.region;
      region.insert(region.end(), py.region.begin(), py.region.end());
      std::vector<Expr> value(n, Expr::constant(0.0, n));
      for (int i = 0; i < n; ++i) {
        Expr acc = Expr::constant(0.0, n);
        for (int k = 0; k < n; ++k)
          acc = acc + py.jac[i][k] * px.value[k] - px.jac[i][k] * py.value[k];
        value[i] = acc;
      }
      pieces.emplace_back(std::move(region), std::move(value));
    }
  Regularity reg = Regularity::C0_1;
  if (X.regularity() == Regularity::C2 && Y.regularity() == Regularity::C2 && X.single_piece() &&
      Y.single_piece())
    reg = Regularity::C2;
  return PiecewiseField(n, n, std::move(pieces), reg);
}

namespace detail_bracket {

/// Consistent (cell, probe) pairs adjacent to x for a pair of fields: probes
/// that land in the interior of one piece of each field.
inline std::vector<std::pair<std::pair<int, int>, Vec>> adjacent_pairs(
    const PiecewiseField& X, const PiecewiseField& Y, const Vec& x, double radius,
    std::mt19937_64& rng, int probes = 96) {
  std::vector<std::pair<std::pair<int, int>, Vec>> reps;
  std::normal_distribution<double> gauss(0.0, 1.0);
  auto push = [&](int kx, int ky, const Vec& p) {
    for (const auto& r : reps)
      if (r.first.first == kx && r.first.second == ky) return;
    reps.push_back({{kx, ky}, p});
  };
  for (int attempt = 0; attempt < probes; ++attempt) {
    Vec dir(x.size());
    for (int i = 0; i < x.size(); ++i) dir[i] = gauss(rng);
    double nrm = dir.norm();
    if (nrm == 0) continue;
    Vec probe = x + (radius / nrm) * dir;
    auto kx = X.pieces_at(probe);
    auto ky = Y.pieces_at(probe);
    if (kx.size() == 1 && ky.size() == 1) push(kx[0], ky[0], probe);
  }
  if (reps.empty()) {
    // Both fields piece-free at x (single global pieces): use x itself.
    auto kx = X.pieces_at(x);
    auto ky = Y.pieces_at(x);
    if (kx.size() == 1 && ky.size() == 1) push(kx[0], ky[0], x);
  }
  return reps;
}

}  // namespace detail_bracket

/// [X,Y]_set(x): hull of limits of classical brackets over differentiability
/// points. Deterministic branch representatives evaluate the piece formulas at
/// x itself (limits of analytic formulas along their region).
inline Hull set_valued_bracket(const PiecewiseField& X, const PiecewiseField& Y, const Vec& x,
                               const SamplingConfig& cfg = {}) {
  std::mt19937_64 rng(cfg.seed);
  Hull hull;
  hull.dim = X.dim();
  const double det_radius = cfg.radii.empty() ? 1e-6 : cfg.radii.back();
  for (const auto& [pair, probe] : detail_bracket::adjacent_pairs(X, Y, x, det_radius, rng)) {
    Mat JY = Y.jac_piece(pair.second, x);
    Mat JX = X.jac_piece(pair.first, x);
    hull.add(JY * X.eval_piece(pair.first, x) - JX * Y.eval_piece(pair.second, x));
  }
  std::normal_distribution<double> gauss(0.0, 1.0);
  int usable = 0;
  for (double radius : cfg.radii) {
    for (int s = 0; s < cfg.samples_per_level; ++s) {
      Vec dir(x.size());
      for (int i = 0; i < x.size(); ++i) dir[i] = gauss(rng);
      double nrm = dir.norm();
      if (nrm == 0) continue;
      std::uniform_real_distribution<double> unif(0.0, 1.0);
      Vec xk = x + (radius * std::pow(unif(rng), 1.0 / x.size()) / nrm) * dir;
      auto b = classical_bracket(X, Y, xk);
      if (!b) continue;
      ++usable;
      hull.add(*b, 1e-12);
    }
  }
  if (hull.empty())
    throw DegenerateSampling("set_valued_bracket: no differentiability points found near x");
  if (usable == 0 && hull.vertices.size() <= 1 && !X.single_piece() && !Y.single_piece()) {
    // All random samples non-differentiable: a positive-measure switching set.
    throw DegenerateSampling("set_valued_bracket: sampling degenerate around x");
  }
  return hull;
}

/// [Z,[X,Y]]_set(x): hull of limits of D[X,Y](x_k)·Z(y_k) − DZ(y_k)·[X,Y](x_k)
/// with (x_k, y_k) → (x, x) sampled independently. [X,Y] is formed symbolically
/// per piece; X and Y must be C1_1.
inline Hull set_valued_bracket3(const PiecewiseField& Z, const PiecewiseField& X,
                                const PiecewiseField& Y, const Vec& x,
                                const SamplingConfig& cfg = {}) {
  if (X.regularity() == Regularity::C0_1 || Y.regularity() == Regularity::C0_1)
    throw RegularityError("set_valued_bracket3: X and Y must be C1_1");
  PiecewiseField W = bracket_field(X, Y);
  std::mt19937_64 rng(cfg.seed);
  Hull hull;
  hull.dim = X.dim();
  const double det_radius = cfg.radii.empty() ? 1e-6 : cfg.radii.back();
  // Independent cell pairs: every W-branch against every Z-branch.
  auto wcells = W.adjacent_cells(x, det_radius, rng);
  auto zcells = Z.adjacent_cells(x, det_radius, rng);
  for (const auto& [kw, xprobe] : wcells)
    for (const auto& [kz, yprobe] : zcells) {
      (void)xprobe;
      (void)yprobe;
      Mat JW = W.jac_piece(kw, x);
      Mat JZ = Z.jac_piece(kz, x);
      hull.add(JW * Z.eval_piece(kz, x) - JZ * W.eval_piece(kw, x));
    }
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (double radius : cfg.radii) {
    for (int s = 0; s < cfg.samples_per_level; ++s) {
      auto draw = [&]() {
        Vec dir(x.size());
        for (int i = 0; i < x.size(); ++i) dir[i] = gauss(rng);
        double nrm = dir.norm();
        return Vec(x + (nrm == 0 ? 0.0 : radius * std::pow(unif(rng), 1.0 / x.size()) / nrm) * dir);
      };
      Vec xk = draw(), yk = draw();
      auto JW = W.jacobian(xk);
      auto JZ = Z.jacobian(yk);
      if (!JW || !JZ) continue;
      hull.add((*JW) * Z(yk) - (*JZ) * W(xk), 1e-12);
    }
  }
  if (hull.empty())
    throw DegenerateSampling("set_valued_bracket3: no differentiability points found near x");
  return hull;
}

/// Clarke generalized Jacobian ∂^C F(x) as a hull of row-major-flattened
/// out×n matrices.
inline Hull clarke_jacobian(const PiecewiseField& F, const Vec& x, const SamplingConfig& cfg = {}) {
  std::mt19937_64 rng(cfg.seed);
  Hull hull;
  hull.dim = F.out_dim() * F.dim();
  auto flatten = [&](const Mat& J) {
    Vec v(J.rows() * J.cols());
    for (int i = 0; i < J.rows(); ++i)
      for (int k = 0; k < J.cols(); ++k) v[i * J.cols() + k] = J(i, k);
    return v;
  };
  const double det_radius = cfg.radii.empty() ? 1e-6 : cfg.radii.back();
  for (const auto& [k, probe] : F.adjacent_cells(x, det_radius, rng)) {
    (void)probe;
    hull.add(flatten(F.jac_piece(k, x)));
  }
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (double radius : cfg.radii) {
    for (int s = 0; s < cfg.samples_per_level; ++s) {
      Vec dir(x.size());
      for (int i = 0; i < x.size(); ++i) dir[i] = gauss(rng);
      double nrm = dir.norm();
      if (nrm == 0) continue;
      Vec xk = x + (radius * std::pow(unif(rng), 1.0 / x.size()) / nrm) * dir;
      auto J = F.jacobian(xk);
      if (!J) continue;
      hull.add(flatten(*J), 1e-12);
    }
  }
  if (hull.empty()) throw DegenerateSampling("clarke_jacobian: sampling degenerate around x");
  return hull;
}

inline Mat unflatten(const Vec& v, int rows, int cols) {
  Mat J(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int k = 0; k < cols; ++k) J(i, k) = v[i * cols + k];
  return J;
}

}  // namespace nsoc
