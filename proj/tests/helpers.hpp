#pragma once

#include <initializer_list>
#include <tuple>

#include "crnf/scalar.hpp"
#include "crnf/series.hpp"

namespace testing_helpers {

using Q = crnf::GaussianRational;
using A = crnf::BigComplex;

inline Q q(long n, long d = 1) { return Q::from_rational(mpq_class(n, d)); }
inline Q qi(long n, long d = 1) { return Q::from_rational(0, mpq_class(n, d)); }

template <class S>
crnf::SurfaceSeries<S> surface(crnf::Grading g, int W, std::initializer_list<std::tuple<int, int, int, S>> terms) {
  crnf::SurfaceSeries<S> F(g, W);
  for (auto& [i, j, m, c] : terms) F.set(i, j, m, c);
  return F;
}

// Model polynomial sum a_j z^j zbar^(k-j) as a surface series.
template <class S>
crnf::SurfaceSeries<S> model_series(crnf::Grading g, int W, int k, const std::vector<S>& a) {
  crnf::SurfaceSeries<S> F(g, W);
  for (int j = (k + 1) / 2; j < k; ++j) F.set(j, k - j, 0, a[j]);
  return F;
}

}  // namespace testing_helpers
