#pragma once

// The polynomial space behind the higher-order control variations:
// P♯([0,1]) = {P : P(0) = P(1) = ∫₀¹P = 0}, the recursively constructed
// families P^r_(j,i), the fixed quartic P̃, and the Area pairing that governs
// the second-order coefficients.

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "nsoc/poly.hpp"

namespace nsoc {

struct DegreeCapTooSmall : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Area(P,Q) = ∫₀¹ P·(dQ/dt). For P,Q vanishing at both endpoints this is the
/// signed loop area of s ↦ (P(s),Q(s)) up to sign.
inline Rational area(const Poly& p, const Poly& q) { return inner01(p, q.derivative()); }

/// P̃(t) = 5t⁴ − 10t³ + 6t² − t. Besides lying in P♯, it satisfies ∫₀¹ t·P̃ = 0,
/// which is what kills the A^{0,0,1} coefficient in the step-3 window.
inline Poly tilde_p() {
  return Poly({Rational(0), Rational(-1), Rational(6), Rational(-10), Rational(5)});
}

inline Rational eval0(const Poly& p) { return p(Rational(0)); }
inline Rational eval1(const Poly& p) { return p(Rational(1)); }

inline bool in_psharp(const Poly& p) {
  return eval0(p) == 0 && eval1(p) == 0 && p.integral01() == 0;
}

namespace detail_poly {

// Riesz representers are exact here, so the Hilbert-matrix conditioning that
// would sink a floating implementation is irrelevant.
inline Poly project_onto_nullspace(const Poly& p, const std::vector<Poly>& constraint_reps,
                                   const RationalVector& constraint_values, int space_dim) {
  const std::size_t k = constraint_reps.size();
  if (k == 0) return p;
  // Gram matrix of the space basis {t^0..t^{D}} is implicit: we work with the
  // representers directly. Solve (⟨r_a, r_b⟩) μ = (c_a(p)).
  RationalMatrix S(k, RationalVector(k));
  RationalVector y(k);
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t b = 0; b < k; ++b) S[a][b] = inner01(constraint_reps[a], constraint_reps[b]);
    y[a] = constraint_values[a];
  }
  RationalVector mu = solve_exact(S, y);
  Poly q = p;
  for (std::size_t a = 0; a < k; ++a) q = q - constraint_reps[a] * mu[a];
  (void)space_dim;
  return q;
}

/// Riesz representer (within degree cap D) of the functional P ↦ ∫₀¹ P·w.
inline Poly representer_of_weight(const Poly& w, int cap) {
  const int n = cap + 1;
  RationalMatrix G(n, RationalVector(n));
  RationalVector rhs(n);
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) G[a][b] = Rational(1) / Rational(a + b + 1);
    rhs[a] = inner01(Poly::monomial(a), w);
  }
  RationalVector c = solve_exact(G, rhs);
  return Poly(std::move(c));
}

/// Representer of P ↦ P(t₀).
inline Poly representer_of_eval(const Rational& t0, int cap) {
  const int n = cap + 1;
  RationalMatrix G(n, RationalVector(n));
  RationalVector rhs(n);
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) G[a][b] = Rational(1) / Rational(a + b + 1);
    Rational p(1);
    for (int e = 0; e < a; ++e) p *= t0;
    rhs[a] = p;
  }
  RationalVector c = solve_exact(G, rhs);
  return Poly(std::move(c));
}

/// Shifted Legendre polynomial on [0,1], exact coefficients.
inline Poly shifted_legendre(int k) {
  Poly x2m1({Rational(-1), Rational(2)});  // 2t − 1
  Poly pm1 = Poly::constant(Rational(1));
  if (k == 0) return pm1;
  Poly pn = x2m1;
  for (int n = 1; n < k; ++n) {
    // (n+1) L_{n+1} = (2n+1)·(2t−1)·L_n − n·L_{n−1}
    Poly next = (x2m1 * pn * Rational(2 * n + 1) - pm1 * Rational(n)) * (Rational(1) / Rational(n + 1));
    pm1 = pn;
    pn = next;
  }
  return pn;
}

}  // namespace detail_poly

/// Orthogonal L²-projection of P onto the affine constraint set
/// {Q : Q(0) = Q(1) = ∫₀¹Q = 0} within the degree-capped space.
inline Poly project_to_psharp(const Poly& p, int degree_cap = 12) {
  const int cap = std::max(degree_cap, p.degree());
  std::vector<Poly> reps = {
      detail_poly::representer_of_eval(Rational(0), cap),
      detail_poly::representer_of_eval(Rational(1), cap),
      detail_poly::representer_of_weight(Poly::constant(Rational(1)), cap),
  };
  RationalVector vals = {eval0(p), eval1(p), p.integral01()};
  return detail_poly::project_onto_nullspace(p, reps, vals, cap + 1);
}

/// The family P^1_(j,i), …, P^m_(j,i) of Definition-style recursive selection.
///
/// Constraints realized (exactly, in rational arithmetic):
///   - every P^r is in P♯, except, when j = 0, the designated P^i which
///     satisfies P(0) = P(1) = 0 with ∫₀¹P ≠ 0 (⟺ ∫₀¹ t·dP^i/dt ≠ 0);
///   - ⟨P^r, dP^s/dt⟩ = 0 for all s > r, except the designated pair:
///     for j ≥ 1, ⟨P^j, dP^i/dt⟩ ≠ 0;
///   - sign normalization: Area(P^i,P^j) > 0 (j ≥ 1) resp. ∫₀¹P^i < 0 (j = 0).
struct GohPolyFamily {
  int m = 0;
  int j = 0;  // 0 encodes the drift pairing (Legendre–Clebsch step 2)
  int i = 1;
  std::vector<Poly> polys;  // polys[r-1] = P^r, r = 1..m

  const Poly& P(int r) const { return polys.at(r - 1); }
};

inline GohPolyFamily build_goh_family(int m, int j, int i, int degree_cap = 12) {
  if (!(0 <= j && j < i && i <= m && m >= 1))
    throw std::invalid_argument("build_goh_family: need 0 <= j < i <= m");
  if (degree_cap < m + 6) throw DegreeCapTooSmall("degree cap must be at least m+6");

  const int cap = degree_cap;
  const Poly one = Poly::constant(Rational(1));
  const Poly rep_e0 = detail_poly::representer_of_eval(Rational(0), cap);
  const Poly rep_e1 = detail_poly::representer_of_eval(Rational(1), cap);
  const Poly rep_mean = detail_poly::representer_of_weight(one, cap);

  GohPolyFamily fam;
  fam.m = m;
  fam.j = j;
  fam.i = i;
  fam.polys.assign(m, Poly());

  // Selection at step r: project deterministic seeds onto the constraint
  // nullspace and keep the first admissible result. Candidates parallel to an
  // already-chosen member are rejected: Area(P,P) = 0 makes the projection of
  // a reused seed collapse onto the earlier choice, which would leave the
  // designated pairing unreachable at a later step.
  auto parallel = [](const Poly& p, const Poly& q) {
    return (p * inner01(q, q) - q * inner01(p, q)).is_zero();
  };
  auto select = [&](const std::vector<Poly>& reps, const std::optional<Poly>& nonorth_weight,
                    const std::vector<Poly>& chosen) -> Poly {
    for (int seed = 1; seed <= cap; ++seed) {
      Poly candidate = detail_poly::shifted_legendre(seed);
      RationalVector vals(reps.size());
      bool skip = false;
      for (std::size_t a = 0; a < reps.size(); ++a) vals[a] = inner01(reps[a], candidate);
      Poly projected = detail_poly::project_onto_nullspace(candidate, reps, vals, cap + 1);
      if (projected.is_zero()) skip = true;
      if (!skip && nonorth_weight && inner01(projected, *nonorth_weight) == 0) skip = true;
      for (const Poly& c : chosen)
        if (!skip && !c.is_zero() && parallel(projected, c)) skip = true;
      if (!skip) return projected;
    }
    throw DegreeCapTooSmall("build_goh_family: constraint system admits no seed at cap " +
                            std::to_string(cap));
  };

  const int special = (j == 0) ? i : j;
  for (int r = m; r >= 1; --r) {
    std::vector<Poly> reps = {rep_e0, rep_e1};
    if (r != special || j != 0) reps.push_back(rep_mean);  // zero-mean except the j=0 designated P^i
    std::optional<Poly> nonorth;
    for (int s = r + 1; s <= m; ++s) {
      if (j != 0 && r == j && s == i) continue;  // the designated non-orthogonal pair
      reps.push_back(detail_poly::representer_of_weight(fam.polys[s - 1].derivative(), cap));
    }
    if (j != 0 && r == j) nonorth = fam.polys[i - 1].derivative();
    if (j == 0 && r == i) nonorth = one;  // ∫P^i ≠ 0
    std::vector<Poly> chosen(fam.polys.begin() + r, fam.polys.end());
    fam.polys[r - 1] = select(reps, nonorth, chosen);
  }

  // Sign normalization ("change the sign of one but not both").
  if (j != 0) {
    if (area(fam.P(i), fam.P(j)) < 0) fam.polys[j - 1] = -fam.polys[j - 1];
  } else {
    if (fam.P(i).integral01() > 0) fam.polys[i - 1] = -fam.polys[i - 1];
  }
  return fam;
}

}  // namespace nsoc
