#pragma once

// Normal-form conditions as real-linear functionals on weight slices.

#include <sstream>
#include <string>
#include <vector>

#include "crnf/model.hpp"
#include "crnf/series.hpp"

namespace crnf {

// value = Re( sum_t coef_t * X_{i_t j_t m_t} ), X a full coefficient table.
template <Scalar S>
struct ConditionRow {
  struct Term {
    int i, j, m;
    S coef;
  };
  std::string label;
  std::vector<Term> terms;

  template <class Table>
  S value(const Table& X) const {
    S v(0);
    for (const auto& t : terms) v += t.coef * X.coeff(t.i, t.j, t.m);
    return real_part(v);
  }
};

namespace detail {

inline std::string zlabel(int i, int j, int m) {
  std::ostringstream os;
  os << "Z_{" << i << "," << j << "} u^" << m;
  return os.str();
}

template <Scalar S>
void complex_rows(std::vector<ConditionRow<S>>& rows, const std::string& label,
                  std::vector<typename ConditionRow<S>::Term> terms) {
  ConditionRow<S> re{"Re " + label, terms};
  for (auto& t : terms) t.coef = t.coef * -S::imag_unit();
  ConditionRow<S> im{"Im " + label, std::move(terms)};
  rows.push_back(std::move(re));
  rows.push_back(std::move(im));
}

template <Scalar S>
void coefficient_rows(std::vector<ConditionRow<S>>& rows, int i, int j, int m, bool real_only = false) {
  const std::string label = zlabel(i, j, m);
  if (i == j || real_only)
    rows.push_back({(i == j ? "" : "Re ") + label, {{i, j, m, S(1)}}});
  else
    complex_rows<S>(rows, label, {{i, j, m, S(1)}});
}

}  // namespace detail

// All condition rows at weight mu > k for the model's class.
template <Scalar S>
std::vector<ConditionRow<S>> conditions_at(const ModelPolynomial<S>& M, int mu) {
  using detail::coefficient_rows;
  std::vector<ConditionRow<S>> rows;
  const int k = M.k, l = M.l;
  if (mu <= k) return rows;
  for (int m = 0; k * m <= mu; ++m) {
    const int rest = mu - k * m;  // i + j
    if (M.cls == ModelClass::Circular) {
      // Z_{j0}, j >= 0
      coefficient_rows(rows, rest, 0, m);
      // Z_{l,l+j}, j >= 1, stored as its conjugate Z_{l+j,l}
      if (rest - 2 * l >= 1) coefficient_rows(rows, rest - l, l, m);
      if (rest == 2 * l) coefficient_rows(rows, l, l, m);
      if (rest == 4 * l) coefficient_rows(rows, 2 * l, 2 * l, m);
      if (rest == 6 * l) coefficient_rows(rows, 3 * l, 3 * l, m);
      if (rest == 4 * l - 1) coefficient_rows(rows, 2 * l, 2 * l - 1, m);
      continue;
    }
    // Generic and tube share the first three families.
    if (rest >= 1) coefficient_rows(rows, rest, 0, m);
    if (rest - k >= 0) coefficient_rows(rows, rest - l, l, m);
    if (rest == 2 * k) coefficient_rows(rows, 2 * k - 2 * l, 2 * l, m);
    if (rest == k - 1) {
      if (M.cls == ModelClass::Generic) {
        // (Z_{k-1}, P_z) = sum_j Z_{j,k-1-j} (j+1) conj(a_{j+1})
        std::vector<typename ConditionRow<S>::Term> terms;
        for (int j = 1; j <= k - 2; ++j) {
          S c = S(j + 1) * conj(M.a[j + 1]);
          if (!is_exact_zero(c)) terms.push_back({j, k - 1 - j, m, c});
        }
        detail::complex_rows<S>(rows, "(Z_{k-1}, P_z) u^" + std::to_string(m), std::move(terms));
      } else if (m >= 1) {
        coefficient_rows(rows, k - 2, 1, m, true);
        coefficient_rows(rows, k, k - 1, m - 1, true);
      }
    }
  }
  return rows;
}

// ---------------------------------------------------------------------------

template <Scalar S>
struct ConditionFailure {
  int weight;
  std::string label;
  S value;
};

template <Scalar S>
struct NormalFormCheck {
  bool pass = true;
  int W = 0;
  bool model_matches = true;
  std::vector<ConditionFailure<S>> failures;
  int rows_checked = 0;
};

// |v| <= eps (1 + scale) in approx mode; exact zero otherwise.
template <Scalar S>
bool negligible(const S& v, const HighReal& scale) {
  if constexpr (S::exact) {
    return is_exact_zero(v);
  } else {
    return magnitude(v) <= to_high(approx_epsilon()) * (1 + scale) * 64;
  }
}

template <Scalar S>
HighReal slice_scale(const SurfaceSeries<S>& F, int w) {
  HighReal s = 0;
  const auto sl = F.slice(w);
  for (const auto& [key, c] : sl.half()) {
    HighReal m = magnitude(c);
    if (m > s) s = m;
  }
  return s;
}

template <Scalar S>
NormalFormCheck<S> check_normal_form(const SurfaceSeries<S>& F, const ModelPolynomial<S>& M, int W = -1) {
  NormalFormCheck<S> rep;
  if (W < 0 || W > F.trunc()) W = F.trunc();
  rep.W = W;
  const int k = M.k;
  if (F.k() != k) {
    rep.pass = false;
    rep.model_matches = false;
    return rep;
  }
  for (const auto& [key, c] : F.half()) {
    if (key.w < k && !negligible(c, HighReal(1))) {
      rep.pass = false;
      rep.failures.push_back({key.w, "term below weight k: " + detail::zlabel(key.i, key.j, key.m), c});
    }
  }
  for (int j = 0; j <= k; ++j) {
    S want = (j == 0 || j == k) ? S(0) : M.a[j];
    S d = F.coeff(j, k - j, 0) - want;
    if (!negligible(d, HighReal(1))) {
      rep.pass = false;
      rep.model_matches = false;
      rep.failures.push_back({k, "model coefficient a_" + std::to_string(j), d});
    }
  }
  for (int mu = k + 1; mu <= W; ++mu) {
    auto rows = conditions_at(M, mu);
    HighReal scale = slice_scale(F, mu);
    for (const auto& r : rows) {
      ++rep.rows_checked;
      S v = r.value(F);
      if (!negligible(v, scale)) {
        rep.pass = false;
        rep.failures.push_back({mu, r.label, v});
      }
    }
  }
  return rep;
}

}  // namespace crnf
