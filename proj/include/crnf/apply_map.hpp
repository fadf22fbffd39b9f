#pragma once

// Action of coordinate changes on surface series, composition and inversion
// of maps.
//
// For a map z* = z + f(z,w), w* = w + g(z,w) the transformed series F* is
// defined by
//
//   F*(z + f, zbar + fbar, u + Re g) = F(z, zbar, u) + Im g(z, u + iF),
//
// with f and g evaluated at (z, u + iF). F* is solved grade by grade: the
// grade-preserving part of the substitution is an invertible linear change
// Lin, the rest raises the grade, so
//
//   F*_nu o Lin = [F + Im g(z, u + iF)]_nu - (contributions of F*_{<nu})_nu.

#include <algorithm>
#include <array>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "crnf/errors.hpp"
#include "crnf/series.hpp"

namespace crnf {

namespace detail {

// Truncated powers of a fixed polynomial, computed on demand.
template <Scalar S>
class PowerCache {
 public:
  PowerCache(Poly3<S> base, int W) : base_(std::move(base)), W_(W) {
    pows_.push_back(Poly3<S>::constant(base_.grading(), W_, S(1)));
  }
  const Poly3<S>& operator[](int n) {
    while (static_cast<int>(pows_.size()) <= n) pows_.push_back(pows_.back() * base_);
    return pows_[n];
  }

 private:
  Poly3<S> base_;
  int W_;
  std::vector<Poly3<S>> pows_;
};

// h(z, wv) for a holomorphic h and a (z, zbar, u) polynomial wv.
template <Scalar S>
Poly3<S> substitute_w(const HoloSeries<S>& h, PowerCache<S>& wv_pows, Grading gr, int W) {
  Poly3<S> out(gr, W);
  std::map<int, Poly3<S>> by_wdeg;
  for (const auto& [k, c] : h.terms()) {
    auto it = by_wdeg.try_emplace(k.j, gr, W).first;
    it->second.add(k.i, 0, 0, c);
  }
  for (auto& [j, zpart] : by_wdeg) out += zpart * wv_pows[j];
  return out;
}

// Linear grade-preserving part of a map: z -> a z + c u, u -> b u (c is only
// grade-preserving in the unweighted mode).
template <Scalar S>
struct LinearPart {
  S a{1}, b{1}, c{0};
};

template <Scalar S>
LinearPart<S> linear_part(const MapSeries<S>& T) {
  LinearPart<S> lin;
  lin.a = S(1) + T.f().coeff(1, 0);
  lin.b = S(1) + real_part(T.g().coeff(0, 1));
  if (!T.grading().weighted()) lin.c = T.f().coeff(0, 1);
  if (is_zero(lin.a) || is_zero(lin.b)) throw InputError("map is not invertible at the origin");
  return lin;
}

// p o Lin^{-1}: z -> (z - c u / b) / a, zbar -> conj, u -> u / b.
template <Scalar S>
Poly3<S> substitute_inverse_linear(const Poly3<S>& p, const LinearPart<S>& lin) {
  const Grading gr = p.grading();
  const int W = p.trunc();
  const S ainv = S(1) / lin.a, abinv = conj(ainv), binv = S(1) / lin.b;
  if (is_exact_zero(lin.c)) {
    Poly3<S> out(gr, W);
    for (const auto& [k, c] : p.terms())
      out.add_key(k, c * power(ainv, k.i) * power(abinv, k.j) * power(binv, k.m));
    return out;
  }
  Poly3<S> zmap(gr, W), zbmap(gr, W), umap(gr, W);
  zmap.add(1, 0, 0, ainv);
  zmap.add(0, 0, 1, -lin.c * binv * ainv);
  zbmap = zmap.conjugated();
  umap.add(0, 0, 1, binv);
  PowerCache<S> zp(zmap, W), zbp(zbmap, W), up(umap, W);
  Poly3<S> out(gr, W);
  for (const auto& [k, c] : p.terms()) out += (zp[k.i] * zbp[k.j] * up[k.m]) * c;
  return out;
}


// F* for a map without linear part, by Taylor expansion around (z, zbar, u):
//
//   F*(z + phi, zbar + conj phi, u + psi)
//     = sum_{a,b,c} d_z^a d_zbar^b d_u^c F* phi^a conj(phi)^b psi^c / (a! b! c!).
//
// Every term with a + b + c = n raises the weight by at least n * r, where r
// is the smallest weight increase of phi and psi, so few orders contribute.
template <Scalar S>
Poly3<S> solve_by_taylor(const Poly3<S>& rhs, const Poly3<S>& phi, const Poly3<S>& psi, int W) {
  const Grading gr = rhs.grading();
  const int uw = gr.u_weight();
  int r = W + 1;
  for (const auto& [k, c] : phi.terms()) r = std::min(r, k.w - 1);
  for (const auto& [k, c] : psi.terms()) r = std::min(r, k.w - uw);
  if (r < 1) throw InvariantViolation("apply_map: map does not raise the weight");
  const Poly3<S> phib = phi.conjugated();
  PowerCache<S> pp(phi, W), pbp(phib, W), sp(psi, W);
  std::map<std::array<int, 3>, Poly3<S>> prod;
  auto Phi = [&](int a, int b, int c) -> const Poly3<S>& {
    auto it = prod.find({a, b, c});
    if (it == prod.end()) it = prod.emplace(std::array<int, 3>{a, b, c}, pp[a] * pbp[b] * sp[c]).first;
    return it->second;
  };
  Poly3<S> acc(gr, W), result(gr, W);
  for (int nu = 0; nu <= W; ++nu) {
    Poly3<S> fnu = rhs.slice(nu) - acc.slice(nu);
    if (fnu.empty()) continue;
    result += fnu;
    const int nmax = (W - nu) / r;
    std::map<std::array<int, 3>, Poly3<S>> deriv;
    for (const auto& [k, c] : fnu.terms())
      for (int a = 0; a <= k.i && a <= nmax; ++a)
        for (int b = 0; b <= k.j && a + b <= nmax; ++b)
          for (int cc = 0; cc <= k.m && a + b + cc <= nmax; ++cc) {
            if (a + b + cc == 0) continue;
            const S coef = c * S(binomial(k.i, a) * binomial(k.j, b) * binomial(k.m, cc));
            auto it = deriv.try_emplace({a, b, cc}, gr, W).first;
            it->second.add(k.i - a, k.j - b, k.m - cc, coef);
          }
    for (const auto& [abc, D] : deriv)
      if (!D.empty()) acc += D * Phi(abc[0], abc[1], abc[2]);
  }
  return result;
}

}  // namespace detail

// Transforms F by the map T, returning F* to weight W (see header comment).
template <Scalar S>
SurfaceSeries<S> apply_map(const SurfaceSeries<S>& F, const MapSeries<S>& T, int W) {
  const Grading gr = F.grading();
  require_same_grading(gr, T.grading(), "apply_map");
  if (auto v = T.violation_graph_form(); !v.empty()) throw InputError("apply_map: map breaks graph form: " + v);
  if (gr.weighted()) {
    if (auto v = T.violation_harmonic_free(); !v.empty())
      throw InputError("apply_map: map breaks the weighted form: " + v);
    if (F.min_weight() < gr.k) throw InputError("apply_map: series has terms of weight < k");
  }
  W = std::min({W, F.trunc(), T.trunc()});

  const Poly3<S> Fp = F.to_poly().truncated(W).with_trunc(W);
  const S I = S::imag_unit();

  // w = u + iF and its powers.
  Poly3<S> wv = Poly3<S>::monomial(gr, W, 0, 0, 1, S(1)) + Fp * I;
  detail::PowerCache<S> wv_pows(wv, W);

  Poly3<S> fc = detail::substitute_w(T.f(), wv_pows, gr, W);
  Poly3<S> gc = detail::substitute_w(T.g(), wv_pows, gr, W);

  const Poly3<S> rhs = Fp + gc.imag_part();
  Poly3<S> Z = Poly3<S>::monomial(gr, W, 1, 0, 0, S(1)) + fc;
  Poly3<S> U = Poly3<S>::monomial(gr, W, 0, 0, 1, S(1)) + gc.real_part();
  const auto lin = detail::linear_part(T);
  if (is_exact_zero(lin.a - S(1)) && is_exact_zero(lin.b - S(1)) && is_exact_zero(lin.c)) {
    auto out = SurfaceSeries<S>::from_poly(detail::solve_by_taylor(rhs, fc, gc.real_part(), W), S::exact);
    out.flags() = F.flags();
    return out;
  }

  detail::PowerCache<S> zp(Z, W), zbp(Z.conjugated(), W), up(U, W);
  std::map<std::pair<int, int>, Poly3<S>> zzb;
  auto zzb_pow = [&](int i, int j) -> const Poly3<S>& {
    auto it = zzb.find({i, j});
    if (it == zzb.end()) it = zzb.emplace(std::make_pair(i, j), zp[i] * zbp[j]).first;
    return it->second;
  };

  // acc holds sum over solved grades of F*_nu(Z, Zbar, U).
  Poly3<S> acc(gr, W);
  Poly3<S> result(gr, W);
  for (int nu = 0; nu <= W; ++nu) {
    Poly3<S> target = rhs.slice(nu) - acc.slice(nu);
    if (target.empty()) continue;
    Poly3<S> fnu = detail::substitute_inverse_linear(target, lin);
    result += fnu;
    // Half-sum: X = sum_{i>j} a z^i zb^j u^m + 1/2 sum_{i=j}; F*(Z..) = X + conj X.
    // Grouped by the power of u.
    const S one_half = S::from_rational(mpq_class(1, 2));
    std::map<int, Poly3<S>> by_m;
    for (const auto& [k, c] : fnu.terms()) {
      if (k.i < k.j) continue;
      const S coef = (k.i == k.j) ? c * one_half : c;
      auto it = by_m.try_emplace(k.m, gr, W).first;
      it->second += zzb_pow(k.i, k.j) * coef;
    }
    Poly3<S> half(gr, W);
    for (auto& [m, part] : by_m) half += m == 0 ? part : part * up[m];
    acc += half + half.conjugated();
  }
  auto out = SurfaceSeries<S>::from_poly(result, S::exact);
  out.flags() = F.flags();
  return out;
}

// Holomorphic substitution h(Z(z,w), Wn(z,w)).
template <Scalar S>
HoloSeries<S> substitute_holo(const HoloSeries<S>& h, const HoloSeries<S>& Z, const HoloSeries<S>& Wn, int trunc) {
  const Grading gr = h.grading();
  HoloSeries<S> out(gr, trunc);
  std::vector<HoloSeries<S>> zp, wp;
  HoloSeries<S> one(gr, trunc);
  one.add(0, 0, S(1));
  zp.push_back(one);
  wp.push_back(one);
  for (const auto& [k, c] : h.terms()) {
    if (k.w > trunc) break;
    while (static_cast<int>(zp.size()) <= k.i) zp.push_back(zp.back() * Z.truncated(trunc));
    while (static_cast<int>(wp.size()) <= k.j) wp.push_back(wp.back() * Wn.truncated(trunc));
    out += (zp[k.i] * wp[k.j]) * c;
  }
  return out;
}

// (outer o inner): first inner, then outer.
template <Scalar S>
MapSeries<S> compose(const MapSeries<S>& outer, const MapSeries<S>& inner) {
  const Grading gr = outer.grading();
  require_same_grading(gr, inner.grading(), "compose");
  const int W = std::min(outer.trunc(), inner.trunc());
  const int fW = MapSeries<S>::f_trunc_for(gr, W);
  HoloSeries<S> Z(gr, W), Wn(gr, W);
  Z.add(1, 0, S(1));
  Z += inner.f().with_trunc(W);
  Wn.add(0, 1, S(1));
  Wn += inner.g();
  HoloSeries<S> f = inner.f().with_trunc(fW) + substitute_holo(outer.f(), Z, Wn, fW);
  HoloSeries<S> g = inner.g().with_trunc(W) + substitute_holo(outer.g(), Z, Wn, W);
  return MapSeries<S>(gr, W, std::move(f), std::move(g));
}

// Inverse map by fixed-point iteration T(S(x)) = x.
template <Scalar S>
MapSeries<S> inverse(const MapSeries<S>& T) {
  const Grading gr = T.grading();
  const int W = T.trunc();
  const int fW = T.f_trunc();
  const auto lin = detail::linear_part(T);
  // Nonlinear remainder of T.
  HoloSeries<S> fh = T.f(), gh = T.g();
  fh.set(1, 0, S(0));
  gh.set(0, 1, S(0));
  if (!gr.weighted()) fh.set(0, 1, S(0));
  const S ainv = S(1) / lin.a, binv = S(1) / lin.b;
  MapSeries<S> cur(gr, W);
  for (int iter = 0; iter <= W + 1; ++iter) {
    HoloSeries<S> Z(gr, W), Wn(gr, W);
    Z.add(1, 0, S(1));
    Z += cur.f().with_trunc(W);
    Wn.add(0, 1, S(1));
    Wn += cur.g();
    // Lin(z*, w*) + N(z*, w*) = (z, w) with (z*, w*) = S(z, w).
    HoloSeries<S> nw = substitute_holo(gh, Z, Wn, W);
    HoloSeries<S> nz = substitute_holo(fh, Z, Wn, fW);
    // w* = (w - N_g) / b
    HoloSeries<S> wstar(gr, W);
    wstar.add(0, 1, S(1));
    wstar -= nw;
    wstar *= binv;
    // z* = (z - c w* - N_f) / a
    HoloSeries<S> zstar(gr, fW);
    zstar.add(1, 0, S(1));
    zstar -= nz;
    if (!is_exact_zero(lin.c)) zstar -= wstar.truncated(fW) * lin.c;
    zstar *= ainv;
    HoloSeries<S> f = zstar;
    f.add(1, 0, S(-1));
    HoloSeries<S> g = wstar;
    g.add(0, 1, S(-1));
    MapSeries<S> next(gr, W, f, g);
    if (next.near_equal(cur) && iter > 0) return next;
    cur = std::move(next);
  }
  return cur;
}

}  // namespace crnf
