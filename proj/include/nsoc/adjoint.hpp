#pragma once

// Adjoint (costate) integration along a candidate trajectory: backward
// integration of dp/dt = −p·M(t) where M(t) is a measurable selection of the
// Clarke generalized Jacobian of x ↦ f(x) + Σ g_i(x)uⁱ(t), plus fundamental
// matrices for transporting variation vectors to the end time.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "nsoc/bracket.hpp"
#include "nsoc/system.hpp"

namespace nsoc {

struct SelectionUnavailable : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class SelectionPolicy { DifferentiableSide, Vertex, Midpoint };

inline std::string to_string(SelectionPolicy p) {
  switch (p) {
    case SelectionPolicy::DifferentiableSide: return "differentiable_side";
    case SelectionPolicy::Vertex: return "vertex";
    case SelectionPolicy::Midpoint: return "midpoint";
  }
  return "?";
}

inline SelectionPolicy selection_policy_from_string(const std::string& s) {
  if (s == "differentiable_side") return SelectionPolicy::DifferentiableSide;
  if (s == "vertex") return SelectionPolicy::Vertex;
  if (s == "midpoint") return SelectionPolicy::Midpoint;
  throw std::invalid_argument("unknown selection policy: " + s);
}

namespace detail_adjoint {

/// Branch Jacobians of F at x (one per adjacent piece, deduplicated).
inline std::vector<Mat> branch_jacobians(const PiecewiseField& F, const Vec& x) {
  std::vector<Mat> out;
  for (int k : F.pieces_at(x)) {
    Mat J = F.jac_piece(k, x);
    bool dup = false;
    for (const auto& E : out) dup = dup || (E - J).norm() <= 1e-12 * std::max(1.0, J.norm());
    if (!dup) out.push_back(J);
  }
  if (out.empty()) throw SelectionUnavailable("branch_jacobians: no piece contains x");
  return out;
}

inline Mat select_branch(const std::vector<Mat>& branches, SelectionPolicy policy, int vertex,
                         const std::optional<Mat>& incoming, bool* ambiguous) {
  if (branches.size() == 1) return branches[0];
  if (ambiguous) *ambiguous = true;
  switch (policy) {
    case SelectionPolicy::DifferentiableSide:
      if (incoming) return *incoming;
      // No incoming side available: fall through to the midpoint.
      [[fallthrough]];
    case SelectionPolicy::Midpoint: {
      Mat acc = Mat::Zero(branches[0].rows(), branches[0].cols());
      for (const auto& J : branches) acc += J;
      return acc / double(branches.size());
    }
    case SelectionPolicy::Vertex:
      return branches[vertex % int(branches.size())];
  }
  return branches[0];
}

}  // namespace detail_adjoint

/// M(t) = selection of ∂^C_x f(x̄(t)) + Σ selection of ∂^C_x g_i(x̄(t))·uⁱ(t)
/// (the sum-rule side of the adjoint inclusion).
class JacobianSelection {
 public:
  JacobianSelection(const ControlAffineSystem& sys, const Trajectory& traj, const Control& u,
                    SelectionPolicy policy, int vertex = 0)
      : sys_(&sys), traj_(&traj), u_(&u), policy_(policy), vertex_(vertex) {}

  Mat operator()(double t) const {
    Vec x = traj_->at(t);
    Vec uv = (*u_)(t);
    bool amb = false;
    Mat M = pick(sys_->drift, x, t, amb);
    for (int i = 0; i < sys_->m(); ++i) M += uv[i] * pick(sys_->controlled[i], x, t, amb);
    if (amb) ambiguous_times_.push_back(t);
    return M;
  }

  const std::vector<double>& ambiguous_times() const { return ambiguous_times_; }
  SelectionPolicy policy() const { return policy_; }

 private:
  const ControlAffineSystem* sys_;
  const Trajectory* traj_;
  const Control* u_;
  SelectionPolicy policy_;
  int vertex_;
  mutable std::vector<double> ambiguous_times_;

  Mat pick(const PiecewiseField& F, const Vec& x, double t, bool& amb) const {
    auto branches = detail_adjoint::branch_jacobians(F, x);
    std::optional<Mat> incoming;
    if (branches.size() > 1 && policy_ == SelectionPolicy::DifferentiableSide) {
      // Limit from the incoming piece: evaluate just before t along the path.
      double tm = std::max(traj_->path.t_begin, t - 1e-9 * std::max(1.0, std::fabs(t)));
      Vec xm = traj_->at(tm);
      auto ks = F.pieces_at(xm);
      if (ks.size() == 1) incoming = F.jac_piece(ks[0], x);
    }
    bool local = false;
    Mat M = detail_adjoint::select_branch(branches, policy_, vertex_, incoming, &local);
    amb = amb || local;
    return M;
  }
};

struct Costate {
  std::vector<double> mesh;   // shared with the trajectory
  std::vector<Vec> values;    // row covectors p(t_k), stored as column vectors
  double lambda = 0.0;
  SelectionPolicy policy = SelectionPolicy::DifferentiableSide;
  OdePath path;               // in reversed time τ = T − t
  double T = 0.0;
  std::vector<std::string> notes;

  Vec at(double t) const { return path.at(T - t); }

  bool nontrivial(double tol = 1e-12) const {
    double nrm = std::hypot(values.empty() ? 0.0 : values.back().norm(), lambda);
    return nrm >= tol;
  }
};

/// Backward integration of the adjoint equation for a given selection policy.
/// The returned mesh matches the trajectory mesh.
inline Costate integrate_adjoint(const ControlAffineSystem& sys, const Trajectory& traj,
                                 const Control& u, const Vec& pT, double lambda,
                                 SelectionPolicy policy = SelectionPolicy::DifferentiableSide,
                                 double tol = 1e-11, int vertex = 0) {
  if (pT.norm() + std::fabs(lambda) < 1e-12)
    throw std::invalid_argument("integrate_adjoint: trivial terminal multiplier");
  const double T = traj.mesh.back();
  JacobianSelection select(sys, traj, u, policy, vertex);

  // τ = T − t, q(τ) = p(T − τ)ᵀ: dq/dτ = M(T−τ)ᵀ q.
  Rhs rhs = [&](double tau, const Vec& q) { return Vec(select(T - tau).transpose() * q); };
  OdeOptions opt;
  opt.rtol = tol;
  opt.atol = tol * 1e-2;
  std::vector<double> brk;
  for (double t : traj.mesh) brk.push_back(T - t);
  std::sort(brk.begin(), brk.end());
  OdePath qpath = integrate_ode(rhs, 0.0, T, pT, opt, {}, brk);

  Costate c;
  c.mesh = traj.mesh;
  c.lambda = lambda;
  c.policy = policy;
  c.T = T;
  c.path = std::move(qpath);
  for (double t : traj.mesh) c.values.push_back(c.path.at(T - t));
  if (!select.ambiguous_times().empty())
    c.notes.push_back("selection ambiguous at " +
                      std::to_string(select.ambiguous_times().size()) +
                      " evaluation times (Clarke hull not a singleton)");
  return c;
}

/// Fundamental matrix solution at T of dE/ds = M(s)·E(s), E(t1) = id.
inline Mat fundamental_matrix(const std::function<Mat(double)>& M, int n, double t1, double T,
                              double tol = 1e-11) {
  if (t1 > T) throw std::invalid_argument("fundamental_matrix: need t1 <= T");
  Vec e0(n * n);
  Mat id = Mat::Identity(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) e0[i * n + j] = id(i, j);
  Rhs rhs = [&](double s, const Vec& v) {
    Mat E = unflatten(v, n, n);
    Mat dE = M(s) * E;
    Vec out(n * n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) out[i * n + j] = dE(i, j);
    return out;
  };
  OdeOptions opt;
  opt.rtol = tol;
  opt.atol = tol * 1e-2;
  if (T - t1 < 1e-15) return id;
  OdePath p = integrate_ode(rhs, t1, T, e0, opt);
  return unflatten(p.end_state(), n, n);
}

}  // namespace nsoc
