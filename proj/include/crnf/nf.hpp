#pragma once

// Normal-form engine: the per-weight linear systems and the induction over
// weights.
//
// At weight mu the slices f_{mu-k+1}, g_mu of a normalized map change the
// weight-mu part of the series by
//
//   F*_mu = F_mu - L(f, g)_mu,   L(f, g) = Re{ i g(z, u + iP) + 2 P_z f(z, u + iP) },
//
// and the conditions of the class pick the unique (f, g) making F*_mu normal.

#include <optional>
#include <string>
#include <vector>

#include "crnf/apply_map.hpp"
#include "crnf/conditions.hpp"
#include "crnf/linsolve.hpp"
#include "crnf/model.hpp"

namespace crnf {

// ---------------------------------------------------------------------------
// The linear operator L.

template <Scalar S>
class LinearOperator {
 public:
  LinearOperator(const ModelPolynomial<S>& M, int mu)
      : k_(M.k), mu_(mu), gr_{M.k}, P_(M.poly(mu)), pows_(P_, mu) {
    Pz_ = P_.d_dz();
  }

  // L of the single monomial c z^i w^n, taken as an f term or a g term.
  Poly3<S> monomial(bool is_f, int i, int n, const S& c) {
    Poly3<S> phi(gr_, mu_);  // c z^i (u + iP)^n
    S it(1);
    for (int t = 0; t <= n; ++t) {
      if (t > 0) it = it * S::imag_unit();
      if (k_ * t > mu_) break;
      Poly3<S> zu(gr_, mu_);
      zu.add(i, 0, n - t, c * it * S(binomial(n, t)));
      phi += zu * pows_[t];
    }
    Poly3<S> X = is_f ? (Pz_ * phi) * S(2) : phi * S::imag_unit();
    Poly3<S> out = X + X.conjugated();
    return out * S::from_rational(mpq_class(1, 2));
  }

  Poly3<S> apply(const HoloSeries<S>& f, const HoloSeries<S>& g) {
    Poly3<S> out(gr_, mu_);
    for (const auto& [key, c] : f.terms()) {
      if (key.w != mu_ - k_ + 1) throw InputError("L: f slice has the wrong weight");
      out += monomial(true, key.i, key.j, c);
    }
    for (const auto& [key, c] : g.terms()) {
      if (key.w != mu_) throw InputError("L: g slice has the wrong weight");
      out += monomial(false, key.i, key.j, c);
    }
    return out.slice(mu_);
  }

 private:
  int k_, mu_;
  Grading gr_;
  Poly3<S> P_, Pz_;
  detail::PowerCache<S> pows_;
};

// Weight-mu part of L(f, g) for slices f of weight mu - k + 1 and g of weight mu.
template <Scalar S>
Poly3<S> linear_operator_L(const HoloSeries<S>& f, const HoloSeries<S>& g, const ModelPolynomial<S>& M, int mu) {
  LinearOperator<S> op(M, mu);
  return op.apply(f, g);
}

// ---------------------------------------------------------------------------
// Per-weight solve.

template <Scalar S>
struct CrossCheckEntry {
  std::string label;
  S predicted;
  S actual;
  bool match = true;
};

template <Scalar S>
struct WeightSolveReport {
  int mu = 0;
  int unknowns = 0;    // real
  int conditions = 0;  // real
  bool square = false;
  bool nonsingular = false;
  bool residual_ok = false;
  HoloSeries<S> f;  // solved slice, weight mu - k + 1
  HoloSeries<S> g;  // solved slice, weight mu
  std::vector<CrossCheckEntry<S>> cross;
  bool cross_ok() const {
    for (const auto& c : cross)
      if (!c.match) return false;
    return true;
  }
};

template <Scalar S>
struct WeightSolution {
  WeightSolveReport<S> report;
  Poly3<S> Fstar;  // predicted weight-mu slice after the change
};

namespace detail {

template <Scalar S>
struct Unknown {
  bool is_f;
  int i, n;
  S unit;  // 1 for the real part, i for the imaginary part
};

template <Scalar S>
std::vector<Unknown<S>> unknowns_at(const ModelPolynomial<S>& M, int mu) {
  std::vector<Unknown<S>> out;
  const int k = M.k;
  const S I = S::imag_unit();
  auto add = [&](bool is_f, int w) {
    for (int n = 0; k * n <= w; ++n) {
      const int i = w - k * n;
      if (!is_f && M.cls == ModelClass::Circular && i == 0 && n == 2) {
        out.push_back({false, 0, 2, I});  // Re g_02 = 0 in the normalized group
        continue;
      }
      out.push_back({is_f, i, n, S(1)});
      out.push_back({is_f, i, n, I});
    }
  };
  add(true, mu - k + 1);
  add(false, mu);
  return out;
}

// Agreement of two values in the slice's scale.
template <Scalar S>
bool agrees(const S& a, const S& b, const HighReal& scale) {
  return negligible(a - b, scale);
}

}  // namespace detail

// Entry-by-entry comparison of the solved slice against the closed-form
// dependence of the normalized coefficients on (f, g).
template <Scalar S>
std::vector<CrossCheckEntry<S>> cross_check_weight(const ModelPolynomial<S>& M, int mu, const Poly3<S>& Fmu,
                                                   const Poly3<S>& Fs, const HoloSeries<S>& f,
                                                   const HoloSeries<S>& g) {
  std::vector<CrossCheckEntry<S>> out;
  const int k = M.k, l = M.l;
  const S I = S::imag_unit();
  const S half = S::from_rational(mpq_class(1, 2));
  auto fc = [&](int i, int n) { return n < 0 || i < 0 ? S(0) : f.coeff(i, n); };
  auto gc = [&](int i, int n) { return n < 0 || i < 0 ? S(0) : g.coeff(i, n); };
  auto Fo = [&](int i, int j, int m) { return Fmu.coeff(i, j, m); };
  auto Fn = [&](int i, int j, int m) { return Fs.coeff(i, j, m); };
  HighReal scale = 0;
  for (const auto& [key, c] : Fmu.terms()) scale = std::max(scale, magnitude(c));
  auto record = [&](const std::string& label, const S& pred, const S& act) {
    out.push_back({label, pred, act, detail::agrees(pred, act, scale)});
  };
  auto entry = [&](int i, int j, int m, const S& delta) {
    record(detail::zlabel(i, j, m), delta + Fo(i, j, m), Fn(i, j, m));
  };
  auto re = [](const S& x) { return real_part(x); };
  auto im = [](const S& x) { return imag_part(x); };
  auto sm = [](long v) { return S(v); };

  for (int m = 0; k * m <= mu; ++m) {
    const int rest = mu - k * m;
    if (M.cls == ModelClass::Circular) {
      if (rest >= 1) entry(rest, 0, m, -(I * half) * gc(rest, m));
      if (rest == 0) entry(0, 0, m, im(gc(0, m)));
      if (rest - 2 * l >= 1) {
        const int j = rest - 2 * l;
        entry(l + j, l, m, -sm(l) * fc(j + 1, m) + half * sm(m + 1) * gc(j, m + 1));
      }
      if (rest == 2 * l) entry(l, l, m, re(sm(m + 1) * gc(0, m + 1)) - sm(2 * l) * re(fc(1, m)));
      if (rest == 4 * l)
        entry(2 * l, 2 * l, m,
              -half * im(sm((m + 2) * (m + 1)) * gc(0, m + 2)) + sm(2 * l) * im(sm(m + 1) * fc(1, m + 1)));
      if (rest == 6 * l)
        entry(3 * l, 3 * l, m,
              -S::from_rational(mpq_class(1, 6)) * re(sm((m + 3) * (m + 2) * (m + 1)) * gc(0, m + 3)) +
                  sm(l) * re(sm((m + 2) * (m + 1)) * fc(1, m + 2)));
      if (rest == 4 * l - 1) entry(2 * l, 2 * l - 1, m, I * sm(l) * conj(sm(m + 1) * fc(0, m + 1)));
      continue;
    }
    // Generic and tube.
    if (rest >= 1) {
      S d = -(I * half) * gc(rest, m);
      if (rest == k - 1 && l == 1) d = d - conj(fc(0, m)) * conj(M.a[1]);
      entry(rest, 0, m, d);
    }
    if (rest - k >= 0) {
      const int j = rest - k;
      if (j == 0) {
        entry(k - l, l, m, -sm(k - l) * fc(1, m) - sm(l) * conj(fc(1, m)) + re(sm(m + 1) * gc(0, m + 1)));
      } else {
        S d = -sm(k - l) * fc(j + 1, m) + half * sm(m + 1) * gc(j, m + 1);
        if (j == k - 1 && l == 1) d = d + I * conj(sm(m + 1) * fc(0, m + 1));
        entry(k - l + j, l, m, d);
      }
    }
    if (rest == 2 * k) {
      const S a2l = conj(M.a[2 * l]);
      const S f1p = sm(m + 1) * fc(1, m + 1);
      entry(2 * k - 2 * l, 2 * l, m,
            -sm(k - 2 * l) * fc(k + 1, m) * a2l - I * sm(k - l) * f1p + I * sm(l) * conj(f1p) +
                half * sm(m + 1) * gc(k, m + 1) * a2l - half * im(sm((m + 2) * (m + 1)) * gc(0, m + 2)));
    }
    if (rest == k - 1 && m >= 1) {
      if (M.cls == ModelClass::Generic) {
        auto pz = M.pz(), pzb = M.pzbar();
        S lhs_new(0), lhs_old(0);
        for (int j = 1; j <= k - 2; ++j) {
          S w = sm(j + 1) * conj(M.a[j + 1]);
          lhs_new += Fn(j, k - 1 - j, m) * w;
          lhs_old += Fo(j, k - 1 - j, m) * w;
        }
        S pred = -fc(0, m) * scalar_product(pz, pz) - conj(fc(0, m)) * scalar_product(pzb, pz) + lhs_old;
        record("(Z_{k-1}, P_z) u^" + std::to_string(m), pred, lhs_new);
      } else {
        const S C = S::from_rational(tube_constant(k));
        record("Re " + detail::zlabel(k - 2, 1, m), -sm(2 * (k - 1)) * re(fc(0, m)) + re(Fo(k - 2, 1, m)),
               re(Fn(k - 2, 1, m)));
        const int mm = m - 1;
        record("Re " + detail::zlabel(k, k - 1, mm),
               (S(2) * C - S(1)) * im(sm(mm + 1) * fc(0, mm + 1)) - re(fc(k, mm)) +
                   half * re(sm(mm + 1) * gc(k - 1, mm + 1)) + re(Fo(k, k - 1, mm)),
               re(Fn(k, k - 1, mm)));
      }
    }
  }
  return out;
}

// Solves for the weight-mu slices of the normalizing map. F_cur must be
// normalized below weight mu.
template <Scalar S>
WeightSolution<S> solve_weight(const SurfaceSeries<S>& F_cur, const ModelPolynomial<S>& M, int mu,
                               bool cross_check = false) {
  using RT = RealTraits<S>;
  using R = RealOf<S>;
  const int k = M.k;
  const Grading gr{k};
  if (mu <= k) throw InputError("solve_weight: weight must exceed k");
  WeightSolution<S> sol;
  auto& rep = sol.report;
  rep.mu = mu;
  rep.f = HoloSeries<S>(gr, mu - k + 1);
  rep.g = HoloSeries<S>(gr, mu);

  const auto rows = conditions_at(M, mu);
  const auto cols = detail::unknowns_at(M, mu);
  rep.unknowns = static_cast<int>(cols.size());
  rep.conditions = static_cast<int>(rows.size());
  rep.square = rep.unknowns == rep.conditions;
  if (!rep.square)
    throw InvariantViolation("weight " + std::to_string(mu) + ": " + std::to_string(rep.conditions) +
                             " real conditions vs " + std::to_string(rep.unknowns) + " real unknowns");

  const Poly3<S> Fmu = F_cur.slice(mu).to_poly().slice(mu);
  LinearOperator<S> op(M, mu);
  std::vector<Poly3<S>> Lcols;
  Lcols.reserve(cols.size());
  for (const auto& c : cols) Lcols.push_back(op.monomial(c.is_f, c.i, c.n, c.unit));

  const int n = rep.unknowns;
  Matrix<R> Amat(n, std::vector<R>(n));
  std::vector<R> b(n);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) Amat[r][c] = RT::from(rows[r].value(Lcols[c]));
    b[r] = RT::from(rows[r].value(Fmu));
  }
  auto x = solve_square<S>(Amat, b);
  rep.nonsingular = x.has_value();
  if (!x) throw InvariantViolation("weight " + std::to_string(mu) + ": singular normalization system");

  sol.Fstar = Fmu;
  for (int c = 0; c < n; ++c) {
    const S xc = RT::to((*x)[c]);
    if (is_exact_zero(xc)) continue;
    const S v = xc * cols[c].unit;
    (cols[c].is_f ? rep.f : rep.g).add(cols[c].i, cols[c].n, v);
    sol.Fstar -= Lcols[c] * xc;
  }

  HighReal scale = 0;
  for (const auto& [key, c] : Fmu.terms()) scale = std::max(scale, magnitude(c));
  rep.residual_ok = true;
  for (const auto& r : rows)
    if (!negligible(r.value(sol.Fstar), scale)) rep.residual_ok = false;
  if (!rep.residual_ok) throw InvariantViolation("weight " + std::to_string(mu) + ": residual check failed");

  if (cross_check) rep.cross = cross_check_weight(M, mu, Fmu, sol.Fstar, rep.f, rep.g);
  return sol;
}

// ---------------------------------------------------------------------------
// Full normalization.

struct NormalizeOptions {
  bool cross_check = false;
  // Re-apply the accumulated map to the input and compare with the result.
  bool verify_round_trip = true;
};

template <Scalar S>
struct NormalFormResult {
  int k = 0;
  int W = 0;
  SurfaceSeries<S> nf;       // normal form to weight W
  SurfaceSeries<S> partial;  // input after the prefix maps
  MapSeries<S> T;            // normalizing map, partial -> nf
  PrefixMaps<S> prefix;
  ModelPolynomial<S> model;
  std::vector<WeightSolveReport<S>> reports;
  std::optional<mpq_class> tube_C;
  NormalFormCheck<S> check;
  bool round_trip_ok = false;
  bool raw_input = false;

  bool cross_ok() const {
    for (const auto& r : reports)
      if (!r.cross_ok()) return false;
    return true;
  }
};

// Prefix stage: type detection, weighted regrading, model normalization.
template <Scalar S>
struct PrefixStage {
  int k = 0;
  int W = 0;
  bool raw = false;
  SurfaceSeries<S> series;
  PrefixMaps<S> prefix;
  ModelPolynomial<S> model;
};

template <Scalar S>
PrefixStage<S> prepare(const SurfaceSeries<S>& F, int W) {
  PrefixStage<S> st;
  SurfaceSeries<S> G;
  if (!F.grading().weighted()) {
    st.raw = true;
    auto H = remove_harmonics(F);
    st.k = H.k;
    st.prefix.alpha = H.alpha;
    st.W = W > 0 ? W : 3 * st.k;
    st.W = std::min(st.W, F.trunc());  // weight <= W needs degree <= W
    G = H.series.regraded(Grading{st.k}, st.W);
  } else {
    validate_weighted_input(F);
    st.k = F.k();
    st.W = W > 0 ? W : 3 * st.k;
    st.W = std::min(st.W, F.trunc());
    G = F.truncated(st.W);
  }
  if (st.W < st.k) throw InputError("truncation below the type k = " + std::to_string(st.k));
  validate_weighted_input(G);
  auto N = normalize_model(G, extract_model(G));
  st.prefix.beta = N.beta;
  st.prefix.sign_flip = N.sign_flip;
  st.model = N.model;
  st.series = N.series;
  if (st.model.cls == ModelClass::Tube &&
      !st.model.poly(st.k).near_equal(tube_model<S>(st.k).poly(st.k)))
    throw InvariantViolation("tube model did not normalize to the standard tube");
  return st;
}

// Normal form of F to weight W (W <= 0: 3k). Raw inputs (degree grading)
// pass through harmonic removal first; the effective W is capped by the
// input truncation.
template <Scalar S>
NormalFormResult<S> normalize(const SurfaceSeries<S>& F, int W = 0, NormalizeOptions opts = {}) {
  NormalFormResult<S> res;
  auto st = prepare(F, W);
  const int k = st.k;
  W = st.W;
  const Grading gr{k};
  res.k = k;
  res.W = W;
  res.raw_input = st.raw;
  res.prefix = st.prefix;
  res.model = st.model;
  res.partial = st.series;
  if (st.model.cls == ModelClass::Tube) res.tube_C = tube_constant(k);

  SurfaceSeries<S> cur = st.series;
  MapSeries<S> T = MapSeries<S>::identity(gr, W);
  for (int mu = k + 1; mu <= W; ++mu) {
    auto sol = solve_weight(cur, st.model, mu, opts.cross_check);
    auto& rep = sol.report;
    if (!rep.f.empty() || !rep.g.empty()) {
      MapSeries<S> Tmu(gr, W, rep.f, rep.g);
      cur = apply_map(cur, Tmu, W);
      T = compose(Tmu, T);
      if (!cur.slice(mu).near_equal(SurfaceSeries<S>::from_poly(sol.Fstar, false).slice(mu)))
        throw InvariantViolation("weight " + std::to_string(mu) + ": update disagrees with the linear prediction");
    }
    res.reports.push_back(std::move(rep));
  }
  res.nf = cur;
  res.nf.flags() = st.series.flags();
  res.T = T;
  res.check = check_normal_form(res.nf, res.model, W);
  if (!res.check.pass) throw InvariantViolation("result fails the normal-form check");
  if (opts.verify_round_trip) {
    res.round_trip_ok = apply_map(res.partial, res.T, W).near_equal(res.nf);
    if (!res.round_trip_ok) throw InvariantViolation("round trip partial -> T -> normal form failed");
  }
  return res;
}

}  // namespace crnf
