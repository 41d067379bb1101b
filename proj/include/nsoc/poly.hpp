#pragma once

// Exact univariate polynomials over the rationals, plus piecewise polynomials
// on an interval partition. These back the variation-profile space and the
// iterated-integral coefficient functionals, where floating error is not
// acceptable (membership constraints and the appendix identities are exact).

#include <algorithm>
#include <stdexcept>
#include <vector>

#include "nsoc/rational.hpp"

namespace nsoc {

class Poly {
 public:
  Poly() = default;
  explicit Poly(RationalVector coeffs) : c_(std::move(coeffs)) { trim(); }
  static Poly constant(Rational v) { return Poly({std::move(v)}); }
  static Poly identity() { return Poly({Rational(0), Rational(1)}); }  // P(t) = t

  static Poly monomial(int degree, Rational coeff = Rational(1)) {
    RationalVector c(degree + 1, Rational(0));
    c[degree] = std::move(coeff);
    return Poly(std::move(c));
  }

  const RationalVector& coeffs() const { return c_; }
  int degree() const { return c_.empty() ? -1 : int(c_.size()) - 1; }
  bool is_zero() const { return c_.empty(); }

  Rational operator()(const Rational& t) const {
    Rational acc(0);
    for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * t + *it;
    return acc;
  }

  double operator()(double t) const {
    double acc = 0.0;
    for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * t + to_double(*it);
    return acc;
  }

  Poly operator+(const Poly& o) const {
    RationalVector r(std::max(c_.size(), o.c_.size()), Rational(0));
    for (std::size_t i = 0; i < c_.size(); ++i) r[i] += c_[i];
    for (std::size_t i = 0; i < o.c_.size(); ++i) r[i] += o.c_[i];
    return Poly(std::move(r));
  }

  Poly operator-(const Poly& o) const {
    RationalVector r(std::max(c_.size(), o.c_.size()), Rational(0));
    for (std::size_t i = 0; i < c_.size(); ++i) r[i] += c_[i];
    for (std::size_t i = 0; i < o.c_.size(); ++i) r[i] -= o.c_[i];
    return Poly(std::move(r));
  }

  Poly operator*(const Poly& o) const {
    if (is_zero() || o.is_zero()) return Poly();
    RationalVector r(c_.size() + o.c_.size() - 1, Rational(0));
    for (std::size_t i = 0; i < c_.size(); ++i)
      for (std::size_t j = 0; j < o.c_.size(); ++j) r[i + j] += c_[i] * o.c_[j];
    return Poly(std::move(r));
  }

  Poly operator*(const Rational& s) const {
    RationalVector r = c_;
    for (auto& v : r) v *= s;
    return Poly(std::move(r));
  }

  Poly operator-() const { return (*this) * Rational(-1); }

  Poly derivative() const {
    if (c_.size() <= 1) return Poly();
    RationalVector r(c_.size() - 1);
    for (std::size_t i = 1; i < c_.size(); ++i) r[i - 1] = c_[i] * Rational(i);
    return Poly(std::move(r));
  }

  /// Antiderivative with value 0 at t = 0.
  Poly antiderivative() const {
    RationalVector r(c_.size() + 1, Rational(0));
    for (std::size_t i = 0; i < c_.size(); ++i) r[i + 1] = c_[i] / Rational(i + 1);
    return Poly(std::move(r));
  }

  Rational integral(const Rational& a, const Rational& b) const {
    Poly F = antiderivative();
    return F(b) - F(a);
  }

  Rational integral01() const { return integral(Rational(0), Rational(1)); }

  /// P(s·t + o) as a polynomial in t (affine substitution).
  Poly compose_affine(const Rational& s, const Rational& o) const {
    Poly result;
    Poly arg({o, s});
    Poly power = Poly::constant(Rational(1));
    for (std::size_t i = 0; i < c_.size(); ++i) {
      result = result + power * c_[i];
      power = power * arg;
    }
    return result;
  }

  bool operator==(const Poly& o) const { return c_ == o.c_; }

 private:
  RationalVector c_;  // monomial coefficients, constant term first

  void trim() {
    while (!c_.empty() && c_.back() == 0) c_.pop_back();
  }
};

/// L² inner product on [0,1]: ⟨P,Q⟩ = ∫₀¹ P·Q.
inline Rational inner01(const Poly& p, const Poly& q) { return (p * q).integral01(); }

/// A polynomial on each cell of a partition lo = s_0 < s_1 < ... < s_K = hi.
struct PiecewisePoly {
  RationalVector breaks;      // size K+1
  std::vector<Poly> pieces;   // size K

  bool empty() const { return pieces.empty(); }
  const Rational& lo() const { return breaks.front(); }
  const Rational& hi() const { return breaks.back(); }

  static PiecewisePoly single(Rational a, Rational b, Poly p) {
    PiecewisePoly out;
    out.breaks = {std::move(a), std::move(b)};
    out.pieces = {std::move(p)};
    return out;
  }

  Rational operator()(const Rational& s) const {
    return pieces[cell(s)](s);
  }

  double eval(double s) const {
    // Locate by double comparison; exact breakpoints are rational but callers
    // pass interior points.
    std::size_t k = 0;
    while (k + 1 < pieces.size() && s > to_double(breaks[k + 1])) ++k;
    return pieces[k](s);
  }

  std::size_t cell(const Rational& s) const {
    if (pieces.empty()) throw std::logic_error("PiecewisePoly: empty");
    if (s < lo() || s > hi()) throw std::out_of_range("PiecewisePoly: point outside domain");
    for (std::size_t k = 0; k + 1 < pieces.size(); ++k)
      if (s <= breaks[k + 1]) return k;
    return pieces.size() - 1;
  }

  /// Refines both operands to a common partition and combines cellwise.
  template <typename F>
  static PiecewisePoly combine(const PiecewisePoly& a, const PiecewisePoly& b, F&& op) {
    if (a.lo() != b.lo() || a.hi() != b.hi())
      throw std::invalid_argument("PiecewisePoly::combine: domain mismatch");
    PiecewisePoly out;
    RationalVector merged;
    std::merge(a.breaks.begin(), a.breaks.end(), b.breaks.begin(), b.breaks.end(),
               std::back_inserter(merged));
    merged.erase(std::unique(merged.begin(), merged.end()), merged.end());
    out.breaks = merged;
    for (std::size_t k = 0; k + 1 < merged.size(); ++k) {
      Rational mid = (merged[k] + merged[k + 1]) / 2;
      out.pieces.push_back(op(a.pieces[a.cell(mid)], b.pieces[b.cell(mid)]));
    }
    return out;
  }

  PiecewisePoly operator+(const PiecewisePoly& o) const {
    return combine(*this, o, [](const Poly& x, const Poly& y) { return x + y; });
  }
  PiecewisePoly operator*(const PiecewisePoly& o) const {
    return combine(*this, o, [](const Poly& x, const Poly& y) { return x * y; });
  }
  PiecewisePoly operator*(const Rational& s) const {
    PiecewisePoly out = *this;
    for (auto& p : out.pieces) p = p * s;
    return out;
  }

  /// Continuous antiderivative vanishing at lo().
  PiecewisePoly antiderivative() const {
    PiecewisePoly out;
    out.breaks = breaks;
    Rational acc(0);
    for (std::size_t k = 0; k < pieces.size(); ++k) {
      Poly F = pieces[k].antiderivative();
      // Shift so that the running value is continuous at the left endpoint.
      Poly shifted = F + Poly::constant(acc - F(breaks[k]));
      out.pieces.push_back(shifted);
      acc = shifted(breaks[k + 1]);
    }
    return out;
  }

  Rational integral() const {
    Rational acc(0);
    for (std::size_t k = 0; k < pieces.size(); ++k)
      acc += pieces[k].integral(breaks[k], breaks[k + 1]);
    return acc;
  }
};

}  // namespace nsoc
