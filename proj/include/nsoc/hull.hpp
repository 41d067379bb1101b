#pragma once

// Compact convex sets in V-representation. Hulls store raw vertex lists
// (no facet enumeration); membership and distance go through a small convex
// QP solved by Frank–Wolfe with away steps, which is dimension-agnostic.

#include <Eigen/Dense>
#include <limits>
#include <stdexcept>
#include <vector>

namespace nsoc {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

struct Hull {
  int dim = 0;
  std::vector<Vec> vertices;

  bool empty() const { return vertices.empty(); }

  static Hull singleton(const Vec& v) {
    Hull h;
    h.dim = int(v.size());
    h.vertices = {v};
    return h;
  }

  static Hull from_points(const std::vector<Vec>& pts, double dedup_tol = 1e-13) {
    Hull h;
    if (pts.empty()) return h;
    h.dim = int(pts[0].size());
    for (const auto& p : pts) h.add(p, dedup_tol);
    return h;
  }

  void add(const Vec& p, double dedup_tol = 1e-13) {
    if (vertices.empty()) dim = int(p.size());
    if (int(p.size()) != dim) throw std::invalid_argument("Hull::add: dimension mismatch");
    double scale = std::max(1.0, p.norm());
    for (const auto& v : vertices)
      if ((v - p).norm() <= dedup_tol * scale) return;
    vertices.push_back(p);
  }

  /// Support function h(d) = max over the hull of ⟨v, d⟩.
  double support(const Vec& d) const {
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& v : vertices) best = std::max(best, v.dot(d));
    return best;
  }

  /// Image under a linear functional: the interval [min p·v, max p·v].
  std::pair<double, double> dot_interval(const Vec& p) const {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const auto& v : vertices) {
      double d = p.dot(v);
      lo = std::min(lo, d);
      hi = std::max(hi, d);
    }
    return {lo, hi};
  }

  double diameter() const {
    double best = 0.0;
    for (std::size_t a = 0; a < vertices.size(); ++a)
      for (std::size_t b = a + 1; b < vertices.size(); ++b)
        best = std::max(best, (vertices[a] - vertices[b]).norm());
    return best;
  }

  Hull operator-() const {
    Hull h;
    h.dim = dim;
    h.vertices.reserve(vertices.size());
    for (const auto& v : vertices) h.vertices.push_back(-v);
    return h;
  }
};

/// Euclidean distance from p to conv(vertices).
///
/// Minimizes ‖Σλ_k v_k − p‖² over the simplex by pairwise Frank–Wolfe with
/// exact line search; the FW dual gap certifies the result, so the returned
/// value is accurate to ~1e−11 on desk-scale hulls.
inline double hull_distance(const Vec& p, const Hull& hull) {
  if (hull.empty()) throw std::invalid_argument("hull_distance: empty hull");
  if (int(p.size()) != hull.dim) throw std::invalid_argument("hull_distance: dimension mismatch");
  const auto& V = hull.vertices;
  const std::size_t K = V.size();
  if (K == 1) return (V[0] - p).norm();

  double scale = std::max(1.0, p.norm());
  for (const auto& v : V) scale = std::max(scale, v.norm());
  const double gap_tol = 1e-24 * scale * scale;

  // Start from the vertex closest to p.
  std::size_t start = 0;
  double best = (V[0] - p).squaredNorm();
  for (std::size_t k = 1; k < K; ++k) {
    double d = (V[k] - p).squaredNorm();
    if (d < best) {
      best = d;
      start = k;
    }
  }
  std::vector<double> lambda(K, 0.0);
  lambda[start] = 1.0;
  Vec x = V[start];

  const int max_iter = 200000;
  for (int it = 0; it < max_iter; ++it) {
    Vec grad = x - p;  // ∇(½‖x−p‖²)
    // FW vertex: minimizes ⟨grad, v⟩; away vertex: maximizes over the support.
    std::size_t fw = 0, away = 0;
    double fw_val = std::numeric_limits<double>::infinity();
    double away_val = -fw_val;
    for (std::size_t k = 0; k < K; ++k) {
      double g = grad.dot(V[k]);
      if (g < fw_val) {
        fw_val = g;
        fw = k;
      }
      if (lambda[k] > 0.0 && g > away_val) {
        away_val = g;
        away = k;
      }
    }
    double gap = grad.dot(x) - fw_val;
    if (gap <= gap_tol) break;

    // Pairwise step: move mass from the away vertex to the FW vertex.
    Vec d = V[fw] - V[away];
    double denom = d.squaredNorm();
    if (denom <= 0.0) break;
    double step = std::min(lambda[away], -grad.dot(d) / denom);
    if (step <= 0.0) break;
    lambda[away] -= step;
    lambda[fw] += step;
    x += step * d;
  }
  double dist2 = (x - p).squaredNorm();
  return dist2 <= 0.0 ? 0.0 : std::sqrt(dist2);
}

inline bool hull_contains(const Vec& p, const Hull& hull, double tol = 1e-9) {
  return hull_distance(p, hull) <= tol;
}

/// Hausdorff distance between two hulls; the sup over each hull is attained
/// at a vertex, so vertex sweeps are exact.
inline double hausdorff_distance(const Hull& a, const Hull& b) {
  double d = 0.0;
  for (const auto& v : a.vertices) d = std::max(d, hull_distance(v, b));
  for (const auto& v : b.vertices) d = std::max(d, hull_distance(v, a));
  return d;
}

}  // namespace nsoc
