#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <stdexcept>
#include <vector>

namespace nsoc {

/// Exact rational scalar used throughout the polynomial layer.
using Rational = boost::multiprecision::cpp_rational;

inline double to_double(const Rational& r) { return static_cast<double>(r); }

/// Exact conversion: every finite double is a dyadic rational.
inline Rational rational_from_double(double x) {
  if (!std::isfinite(x)) throw std::invalid_argument("rational_from_double: non-finite");
  return Rational(x);
}

using RationalMatrix = std::vector<std::vector<Rational>>;
using RationalVector = std::vector<Rational>;

/// Solves A·x = b exactly by Gaussian elimination with nonzero pivoting.
/// Throws if A is singular.
inline RationalVector solve_exact(RationalMatrix A, RationalVector b) {
  const std::size_t n = A.size();
  if (n == 0 || A[0].size() != n || b.size() != n)
    throw std::invalid_argument("solve_exact: shape mismatch");
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    while (pivot < n && A[pivot][col] == 0) ++pivot;
    if (pivot == n) throw std::runtime_error("solve_exact: singular matrix");
    std::swap(A[pivot], A[col]);
    std::swap(b[pivot], b[col]);
    for (std::size_t row = 0; row < n; ++row) {
      if (row == col || A[row][col] == 0) continue;
      Rational factor = A[row][col] / A[col][col];
      for (std::size_t k = col; k < n; ++k) A[row][k] -= factor * A[col][k];
      b[row] -= factor * b[col];
    }
  }
  RationalVector x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = b[i] / A[i][i];
  return x;
}

}  // namespace nsoc
