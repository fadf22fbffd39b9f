#pragma once

// Dense real Gaussian elimination over the real component type of a scalar
// backend: mpq_class (exact pivots) or BigReal (partial pivoting).

#include <optional>
#include <type_traits>
#include <vector>

#include "crnf/scalar.hpp"

namespace crnf {

template <Scalar S>
struct RealTraits;

template <>
struct RealTraits<GaussianRational> {
  using R = mpq_class;
  static R from(const GaussianRational& s) { return s.re(); }
  static GaussianRational to(const R& r) { return GaussianRational(r, mpq_class(0)); }
  static bool zero(const R& r, const R&) { return r == 0; }
  static R abs(const R& r) { return ::abs(r); }
};

template <>
struct RealTraits<BigComplex> {
  using R = BigReal;
  static R from(const BigComplex& s) { return s.re(); }
  static BigComplex to(const R& r) { return BigComplex(r, BigReal(0)); }
  // Zero relative to the scale of the matrix.
  static bool zero(const R& r, const R& scale) {
    return boost::multiprecision::abs(r) <= approx_epsilon() * (scale > 1 ? scale : R(1)) * 64;
  }
  static R abs(const R& r) { return boost::multiprecision::abs(r); }
};

template <Scalar S>
using RealOf = typename RealTraits<S>::R;

template <class R>
using Matrix = std::vector<std::vector<R>>;

namespace detail {

template <Scalar S>
RealOf<S> max_abs(const Matrix<RealOf<S>>& A) {
  using T = RealTraits<S>;
  RealOf<S> m(0);
  for (const auto& row : A)
    for (const auto& v : row)
      if (T::abs(v) > m) m = T::abs(v);
  return m;
}

// Row-reduces A in place (augmented columns included). Returns pivot columns
// among the first `ncols_pivot` columns.
template <Scalar S>
std::vector<int> row_reduce(Matrix<RealOf<S>>& A, int ncols_pivot) {
  using T = RealTraits<S>;
  using R = RealOf<S>;
  const R scale = max_abs<S>(A);
  const int n = static_cast<int>(A.size());
  std::vector<int> pivots;
  int r = 0;
  for (int c = 0; c < ncols_pivot && r < n; ++c) {
    int best = -1;
    for (int i = r; i < n; ++i) {
      if (T::zero(A[i][c], scale)) continue;
      if constexpr (S::exact) {
        best = i;
        break;
      } else {
        if (best < 0 || T::abs(A[i][c]) > T::abs(A[best][c])) best = i;
      }
    }
    if (best < 0) continue;
    std::swap(A[r], A[best]);
    const R inv = R(1) / A[r][c];
    for (auto& v : A[r]) v *= inv;
    for (int i = 0; i < n; ++i) {
      if (i == r || A[i][c] == 0) continue;
      const R f = A[i][c];
      for (std::size_t j = c; j < A[i].size(); ++j) A[i][j] -= f * A[r][j];
    }
    pivots.push_back(c);
    ++r;
  }
  return pivots;
}

}  // namespace detail

// Solves the square system A x = b; nullopt when A is singular.
template <Scalar S>
std::optional<std::vector<RealOf<S>>> solve_square(Matrix<RealOf<S>> A, const std::vector<RealOf<S>>& b) {
  const int n = static_cast<int>(A.size());
  for (int i = 0; i < n; ++i) A[i].push_back(b[i]);
  auto piv = detail::row_reduce<S>(A, n);
  if (static_cast<int>(piv.size()) < n) return std::nullopt;
  std::vector<RealOf<S>> x(n);
  for (int i = 0; i < n; ++i) x[piv[i]] = A[i][n];
  return x;
}

template <Scalar S>
int matrix_rank(Matrix<RealOf<S>> A) {
  if (A.empty()) return 0;
  return static_cast<int>(detail::row_reduce<S>(A, static_cast<int>(A[0].size())).size());
}

}  // namespace crnf
