#pragma once

// Type detection by removal of harmonic terms, the model polynomial P,
// its normalization by z -> beta z, and the Generic / Circular / Tube split.

#include <algorithm>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "crnf/apply_map.hpp"
#include "crnf/errors.hpp"
#include "crnf/series.hpp"

namespace crnf {

enum class ModelClass { Generic, Circular, Tube };

inline const char* class_name(ModelClass c) {
  switch (c) {
    case ModelClass::Circular:
      return "Circular";
    case ModelClass::Tube:
      return "Tube";
    default:
      return "Generic";
  }
}

// Coefficient of z^k zbar^(k-1) in P * P_zbar for the standard tube model.
inline mpq_class tube_constant(int k) {
  mpq_class c(binomial(2 * k - 1, k) - 1, k);
  c.canonicalize();
  return c;
}

// ---------------------------------------------------------------------------

template <Scalar S>
struct ModelPolynomial {
  int k = 0;
  std::vector<S> a;         // a[j] multiplies z^j zbar^(k-j), j = 0..k (a[0] = a[k] = 0)
  int l = 0;                // lowest j with a_j != 0
  std::vector<int> m;       // indices j < k/2 with a_j != 0 (m[0] = l)
  std::vector<int> mprime;  // k - 2 m_i
  int L = 1;                // gcd of mprime (1 when m is empty)
  std::vector<int> q;       // reduction factors
  ModelClass cls = ModelClass::Generic;

  Poly3<S> poly(int W) const {
    Poly3<S> p(Grading{k}, W);
    for (int j = 1; j < k; ++j) p.add(j, k - j, 0, a[j]);
    return p;
  }
  // Coefficient vectors of P_z and P_zbar (degree k-1, index = power of z).
  std::vector<S> pz() const {
    std::vector<S> v(k, S(0));
    for (int i = 0; i <= k - 1; ++i) v[i] = a[i + 1] * S(i + 1);
    return v;
  }
  std::vector<S> pzbar() const {
    std::vector<S> v(k, S(0));
    for (int i = 0; i <= k - 1; ++i) v[i] = a[i] * S(k - i);
    return v;
  }
};

// Sesquilinear pairing of two homogeneous degree-d coefficient vectors
// (index = power of z), ignoring the harmonic entries 0 and d.
template <Scalar S>
S scalar_product(const std::vector<S>& x, const std::vector<S>& y) {
  if (x.size() != y.size()) throw InputError("scalar_product: degree mismatch");
  S out(0);
  for (std::size_t j = 1; j + 1 < x.size(); ++j) out += x[j] * conj(y[j]);
  return out;
}

// Same pairing on (z, zbar) tables restricted to u^0; both must be homogeneous
// of one degree.
template <Scalar S>
S scalar_product(const Poly3<S>& x, const Poly3<S>& y) {
  auto degree_of = [](const Poly3<S>& p) {
    int d = -1;
    for (const auto& [k, c] : p.terms()) {
      if (k.m != 0) throw InputError("scalar_product: table depends on u");
      int dd = k.i + k.j;
      if (d >= 0 && dd != d) throw InputError("scalar_product: table is not homogeneous");
      d = dd;
    }
    return d;
  };
  int dx = degree_of(x), dy = degree_of(y);
  if (dx < 0 || dy < 0) return S(0);
  if (dx != dy) throw InputError("scalar_product: degree mismatch");
  std::vector<S> vx(dx + 1, S(0)), vy(dx + 1, S(0));
  for (const auto& [k, c] : x.terms()) vx[k.i] = c;
  for (const auto& [k, c] : y.terms()) vy[k.i] = c;
  return scalar_product(vx, vy);
}

// |(P_z, P_zbar)|^2 == (P_z, P_z)^2 : Cauchy-Schwarz equality.
template <Scalar S>
bool tube_equality(const ModelPolynomial<S>& M) {
  auto pz = M.pz(), pzb = M.pzbar();
  S cross = scalar_product(pz, pzb);
  S self = scalar_product(pz, pz);
  return near(norm2(cross), self * self);
}

template <Scalar S>
ModelClass classify_model(const ModelPolynomial<S>& M) {
  bool circular = (M.k % 2 == 0);
  for (int j = 1; j < M.k && circular; ++j)
    if (j != M.k / 2 && !is_zero(M.a[j])) circular = false;
  if (circular && !is_zero(M.a[M.k / 2])) return ModelClass::Circular;
  if (tube_equality(M)) return ModelClass::Tube;
  return ModelClass::Generic;
}

// Fills l, m, m', L, q and the class from the coefficients.
template <Scalar S>
void complete_model(ModelPolynomial<S>& M) {
  const int k = M.k;
  M.l = 0;
  for (int j = 1; j < k; ++j)
    if (!is_zero(M.a[j])) {
      M.l = j;
      break;
    }
  if (M.l == 0) throw InvariantViolation("model polynomial vanishes");
  M.m.clear();
  M.mprime.clear();
  M.q.clear();
  for (int j = M.l; 2 * j < k; ++j)
    if (!is_zero(M.a[j])) {
      M.m.push_back(j);
      M.mprime.push_back(k - 2 * j);
    }
  int g = 0;
  std::vector<int> prefix;
  for (int mp : M.mprime) {
    g = std::gcd(g, mp);
    prefix.push_back(g);
  }
  M.L = M.mprime.empty() ? 1 : g;
  for (std::size_t i = 0; i + 1 < prefix.size(); ++i) M.q.push_back(prefix[i] / prefix[i + 1]);
  M.cls = classify_model(M);
}

template <Scalar S>
ModelPolynomial<S> model_from_coefficients(int k, std::vector<S> a) {
  if (static_cast<int>(a.size()) != k + 1) throw InputError("model: need k+1 coefficients");
  ModelPolynomial<S> M;
  M.k = k;
  M.a = std::move(a);
  M.a[0] = S(0);
  M.a[k] = S(0);
  complete_model(M);
  return M;
}

// Model of a weighted, harmonic-free series: its weight-k slice.
template <Scalar S>
ModelPolynomial<S> extract_model(const SurfaceSeries<S>& F) {
  const int k = F.k();
  if (k < 3) throw InputError("extract_model: series must be graded with k >= 3");
  std::vector<S> a(k + 1, S(0));
  for (int j = 0; j <= k; ++j) a[j] = F.coeff(j, k - j, 0);
  if (!is_zero(a[0])) throw InputError("extract_model: weight-k slice has a harmonic term");
  bool any = false;
  for (int j = 1; j < k; ++j) any = any || !is_zero(a[j]);
  if (!any) throw InvariantViolation("extract_model: weight-k slice is zero");
  return model_from_coefficients(k, std::move(a));
}

// Standard models.
template <Scalar S>
ModelPolynomial<S> circular_model(int k) {
  std::vector<S> a(k + 1, S(0));
  a[k / 2] = S(1);
  return model_from_coefficients(k, std::move(a));
}

// (1/k)[(z + zbar)^k - 2 Re z^k].
template <Scalar S>
ModelPolynomial<S> tube_model(int k) {
  std::vector<S> a(k + 1, S(0));
  for (int j = 1; j < k; ++j) a[j] = S::from_rational(mpq_class(binomial(k, j), k));
  return model_from_coefficients(k, std::move(a));
}

// ---------------------------------------------------------------------------
// Harmonic removal.

template <Scalar S>
struct HarmonicRemoval {
  SurfaceSeries<S> series;  // ordinary-degree grading, harmonic-free through degree k
  std::vector<S> alpha;     // alpha[j] for w* = w + sum alpha_j z^j (entries 0, 1 unused)
  int k = 0;
};

// Map w* = w + sum alpha_j z^j in the grading `gr`.
template <Scalar S>
MapSeries<S> harmonic_map(Grading gr, int W, const std::vector<S>& alpha) {
  MapSeries<S> T(gr, W);
  for (std::size_t j = 2; j < alpha.size(); ++j) T.g().add(static_cast<int>(j), 0, alpha[j]);
  return T;
}

// Detects the type k and removes the harmonic terms of the u = 0 slice up to
// degree k. `max_deg` < 0 means the series truncation.
template <Scalar S>
HarmonicRemoval<S> remove_harmonics(const SurfaceSeries<S>& F, int max_deg = -1) {
  if (F.grading().weighted()) throw InputError("remove_harmonics expects ordinary-degree grading");
  const int D = F.trunc();
  if (max_deg < 0 || max_deg > D) max_deg = D;
  const Grading g0{0};
  std::vector<S> alpha(2, S(0));
  int k = 0;
  const S two_i = S(2) * S::imag_unit();
  bool trivial = true;
  for (int d = 2; d <= max_deg; ++d) {
    // Degree <= d part after the maps found so far.
    SurfaceSeries<S> cur = trivial ? F.truncated(d) : apply_map(F.truncated(d), harmonic_map(g0, d, alpha), d);
    bool nonharmonic = false;
    for (int i = 1; i < d; ++i)
      if (!is_zero(cur.coeff(i, d - i, 0))) nonharmonic = true;
    S A = cur.coeff(d, 0, 0);
    alpha.push_back(is_zero(A) ? S(0) : -(two_i * A));
    trivial = trivial && is_exact_zero(alpha.back());
    if (nonharmonic) {
      k = d;
      break;
    }
  }
  if (k == 0) throw TypeExceedsBound(max_deg);
  if (k == 2) throw LeviNondegenerate();
  HarmonicRemoval<S> out;
  out.alpha = alpha;
  out.k = k;
  out.series = trivial ? F : apply_map(F, harmonic_map(g0, D, alpha), D);
  out.series.flags().harmonics_removed = true;
  return out;
}

// Checks that a series given directly in weighted form is already past the
// harmonic-removal step.
template <Scalar S>
void validate_weighted_input(const SurfaceSeries<S>& F) {
  const int k = F.k();
  if (k < 3) {
    if (k == 2) throw LeviNondegenerate();
    throw InputError("type_k must be >= 3 (or 0 for raw degree grading)");
  }
  for (const auto& [key, c] : F.half()) {
    if (key.w < k && !is_zero(c))
      throw InputError("coefficient (" + std::to_string(key.i) + "," + std::to_string(key.j) + "," +
                       std::to_string(key.m) + ") has weight " + std::to_string(key.w) + " < k = " +
                       std::to_string(k) + "; supply the series with type_k = 0");
    if (key.w == k && key.j == 0 && !is_zero(c))
      throw InputError("harmonic term (" + std::to_string(key.i) + ",0," + std::to_string(key.m) +
                       ") of weight k; supply the series with type_k = 0");
  }
}

// ---------------------------------------------------------------------------
// Normalization z -> beta z of the model.

template <Scalar S>
struct PrefixMaps {
  std::vector<S> alpha;  // harmonic removal, w* = w + sum alpha_j z^j
  S beta{1};             // z* = beta^{-1} z
  bool sign_flip = false;  // w* = -w (only when a positive leading coefficient is otherwise unreachable)

  // The whole prefix as one map in ordinary-degree grading.
  MapSeries<S> degree_map(int W) const {
    const Grading g0{0};
    MapSeries<S> T(g0, W);
    const S s = sign_flip ? S(-1) : S(1);
    if (!is_exact_zero(beta - S(1))) T.f().add(1, 0, S(1) / beta - S(1));
    if (sign_flip) T.g().add(0, 1, S(-2));
    for (std::size_t j = 2; j < alpha.size(); ++j) T.g().add(static_cast<int>(j), 0, s * alpha[j]);
    return T;
  }
};

// F*(z, zbar, u) = s F(beta z, conj(beta) zbar, s u) with s = -1 when flipping.
template <Scalar S>
SurfaceSeries<S> rescale_series(const SurfaceSeries<S>& F, const S& beta, bool flip) {
  SurfaceSeries<S> out(F.grading(), F.trunc());
  out.flags() = F.flags();
  const S bb = conj(beta);
  for (const auto& [key, c] : F.half()) {
    S v = c * power(beta, key.i) * power(bb, key.j);
    if (flip && (key.m % 2 == 0)) v = -v;
    out.set(key.i, key.j, key.m, v);
  }
  return out;
}

namespace detail {

struct HighComplex {
  HighReal re, im;
  HighComplex operator*(const HighComplex& o) const { return {re * o.re - im * o.im, re * o.im + im * o.re}; }
  HighComplex conj() const { return {re, -im}; }
  HighReal arg() const {
    HighReal a = atan2(im, re);
    if (a < 0) a += 2 * high_pi();
    return a;
  }
};

inline HighComplex hpow(HighComplex b, int e) {
  HighComplex out{HighReal(1), HighReal(0)};
  for (int t = 0; t < e; ++t) out = out * b;
  return out;
}

// arg(c) in [0, 2 pi / q), exactly: c^q positive real means c lies on a ray
// 2 pi t / q, and only t = 0 is inside.
template <Scalar S>
bool in_sector_exact(const S& c, int q) {
  S cq = power(c, q);
  HighReal a = argument(c), bound = 2 * high_pi() / q;
  if (is_real(cq) && sign(cq) > 0) {
    long t = static_cast<long>(boost::multiprecision::round(a / bound));
    return t % q == 0;
  }
  return a < bound;
}

// Numeric version with a small guard band: the lower edge is included, the
// upper edge excluded.
inline bool in_sector_numeric(const HighComplex& c, int q) {
  const HighReal two_pi = 2 * high_pi();
  const HighReal tol("1e-50");
  HighReal a = c.arg();
  if (two_pi - a < tol) return true;
  return a < two_pi / q - tol;
}

}  // namespace detail

template <Scalar S>
struct ModelNormalization {
  SurfaceSeries<S> series;
  ModelPolynomial<S> model;
  S beta{1};
  bool sign_flip = false;
  int admissible = 0;  // number of beta values satisfying the conditions (= L)
};

// Applies z* = beta^{-1} z (and w* = -w when needed) so that a_l = 1 and the
// argument conditions hold; beta of smallest argument among the admissible.
template <Scalar S>
ModelNormalization<S> normalize_model(const SurfaceSeries<S>& F, const ModelPolynomial<S>& M0) {
  using detail::HighComplex;
  ModelNormalization<S> out;
  const int k = M0.k;
  // Circular: a_{k/2} must become +1; tube with k even: sign of the standard model.
  bool flip = (M0.cls == ModelClass::Circular || (M0.cls == ModelClass::Tube && k % 2 == 0)) &&
              sign(M0.a[k / 2]) < 0;
  SurfaceSeries<S> G = flip ? rescale_series(F, S(1), true) : F;
  ModelPolynomial<S> M = flip ? extract_model(G) : M0;

  const int l = M.l, lp = k - 2 * l;
  const S al = M.a[l];
  const HighReal r = pow(magnitude(al), HighReal(-1) / HighReal(k));
  auto high_of = [](const S& x) { return HighComplex{high_re(x), high_im(x)}; };
  auto transformed_high = [&](const HighComplex& b, int j) {
    HighComplex bb = b.conj();
    HighReal n2 = b.re * b.re + b.im * b.im;
    HighComplex s = hpow(bb, k - 2 * j);
    HighReal sc = pow(n2, j);
    return high_of(M.a[j]) * HighComplex{s.re * sc, s.im * sc};
  };

  std::vector<std::pair<HighReal, HighComplex>> admissible;
  const int ncand = lp == 0 ? 1 : lp;
  for (int t = 0; t < ncand; ++t) {
    HighReal phi = lp == 0 ? HighReal(0) : (argument(al) + 2 * high_pi() * t) / lp;
    HighComplex b{r * cos(phi), r * sin(phi)};
    bool ok = true;
    for (std::size_t i = 0; i + 1 < M.m.size() && ok; ++i)
      ok = detail::in_sector_numeric(transformed_high(b, M.m[i + 1]), M.q[i]);
    if (!ok) continue;
    HighReal ab = b.arg();
    if (2 * high_pi() - ab < HighReal("1e-50")) ab = 0;
    admissible.emplace_back(ab, b);
  }
  if (admissible.empty()) throw InvariantViolation("no admissible beta for the model");
  std::sort(admissible.begin(), admissible.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
  const HighComplex& bh = admissible.front().second;
  S beta = S::from_high(bh.re, bh.im);
  auto transformed = [&](int j) { return M.a[j] * power(beta * conj(beta), j) * power(conj(beta), k - 2 * j); };
  if constexpr (S::exact) {
    bool ok = transformed(l) == S(1);
    for (std::size_t i = 0; i + 1 < M.m.size() && ok; ++i) ok = detail::in_sector_exact(transformed(M.m[i + 1]), M.q[i]);
    if (!ok)
      throw NeedsApproxBackend("normalizing the model needs an irrational root (a_l = " + to_display(al) + ")");
  }
  out.admissible = static_cast<int>(admissible.size());
  out.beta = beta;
  out.sign_flip = flip;
  out.series = rescale_series(G, beta, false);
  if constexpr (!S::exact) out.series.set(k - l, l, 0, S(1));  // a_l is 1 up to rounding
  out.series.flags().model_normalized = true;
  out.model = extract_model(out.series);
  if (out.model.cls != M0.cls) throw InvariantViolation("model class changed under normalization");
  return out;
}

}  // namespace crnf
