#pragma once

// Symmetry groups H of the models, their action on normal forms,
// equivalence of normal forms and the stability-group dimension.
//
// GenericTube: z* = delta e^{i theta} z, w* = delta^k w with e^{i theta} an
// L-th root of unity (delta < 0 allowed for odd k).
// Circular:    z* = delta e^{i theta} z / (1 + mu w)^{1/l},
//              w* = delta^k w / (1 + mu w).
// The action on normal forms applies the map and renormalizes.

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

#include "crnf/nf.hpp"

namespace crnf {

enum class GroupKind { GenericTube, Circular };

inline const char* group_kind_name(GroupKind g) { return g == GroupKind::Circular ? "Circular" : "GenericTube"; }

inline GroupKind group_kind_of(ModelClass c) {
  return c == ModelClass::Circular ? GroupKind::Circular : GroupKind::GenericTube;
}

template <Scalar S>
struct SymmetryElement {
  GroupKind kind = GroupKind::GenericTube;
  int k = 0;
  int L = 1;       // GenericTube: order of the rotation subgroup
  S delta{1};      // real; negative only for GenericTube with odd k
  int rho = 0;     // GenericTube: phase = exp(2 pi i rho / L)
  S phase{1};      // e^{i theta}
  S mu{0};         // Circular only; real

  bool is_identity() const {
    return is_zero(delta - S(1)) && is_zero(phase - S(1)) && is_zero(mu);
  }
};

template <Scalar S>
SymmetryElement<S> generic_tube_element(const ModelPolynomial<S>& M, const S& delta, int rho) {
  if (M.cls == ModelClass::Circular) throw InputError("generic_tube_element: circular model");
  if (!is_real(delta) || is_zero(delta)) throw InputError("delta must be a nonzero real");
  if (M.k % 2 == 0 && sign(delta) < 0) throw InputError("delta must be positive for even k");
  auto ph = root_of_unity<S>(rho, M.L);
  if (!ph) throw NeedsApproxBackend("root of unity of order " + std::to_string(M.L) + " is not a Gaussian rational");
  SymmetryElement<S> h;
  h.kind = GroupKind::GenericTube;
  h.k = M.k;
  h.L = M.L;
  h.delta = delta;
  h.rho = ((rho % M.L) + M.L) % M.L;
  h.phase = *ph;
  return h;
}

template <Scalar S>
SymmetryElement<S> circular_element(int k, const S& delta, const S& phase, const S& mu) {
  if (k % 2 != 0) throw InputError("circular group needs even k");
  if (!is_real(delta) || sign(delta) <= 0) throw InputError("delta must be a positive real");
  if (!is_zero(norm2(phase) - S(1))) throw InputError("phase must have modulus 1");
  if (!is_real(mu)) throw InputError("mu must be real");
  SymmetryElement<S> h;
  h.kind = GroupKind::Circular;
  h.k = k;
  h.delta = delta;
  h.phase = phase;
  h.mu = mu;
  return h;
}

template <Scalar S>
SymmetryElement<S> identity_element(const ModelPolynomial<S>& M) {
  if (M.cls == ModelClass::Circular) return circular_element<S>(M.k, S(1), S(1), S(0));
  return generic_tube_element<S>(M, S(1), 0);
}

namespace detail {

inline void require_same_group(GroupKind a, GroupKind b, int ka, int kb) {
  if (a != b || ka != kb) throw InputError("symmetry elements belong to different groups");
}

}  // namespace detail

// outer o inner.
template <Scalar S>
SymmetryElement<S> compose(const SymmetryElement<S>& outer, const SymmetryElement<S>& inner) {
  detail::require_same_group(outer.kind, inner.kind, outer.k, inner.k);
  SymmetryElement<S> h = inner;
  h.delta = outer.delta * inner.delta;
  h.phase = outer.phase * inner.phase;
  if (h.kind == GroupKind::GenericTube) {
    h.rho = (outer.rho + inner.rho) % h.L;
  } else {
    h.mu = inner.mu + outer.mu * power(inner.delta, h.k);
  }
  return h;
}

template <Scalar S>
SymmetryElement<S> inverse(const SymmetryElement<S>& h) {
  SymmetryElement<S> out = h;
  out.delta = S(1) / h.delta;
  out.phase = conj(h.phase);
  if (h.kind == GroupKind::GenericTube)
    out.rho = (h.L - h.rho) % h.L;
  else
    out.mu = -h.mu / power(h.delta, h.k);
  return out;
}

template <Scalar S>
bool same_element(const SymmetryElement<S>& a, const SymmetryElement<S>& b) {
  return a.kind == b.kind && a.k == b.k && near(a.delta, b.delta) && near(a.phase, b.phase) && near(a.mu, b.mu);
}

// The element as a truncated map in the weighted grading of type k.
template <Scalar S>
MapSeries<S> to_map(const SymmetryElement<S>& h, int W) {
  const int k = h.k;
  const Grading gr{k};
  MapSeries<S> T(gr, W);
  const S lin = h.delta * h.phase;
  const S dk = power(h.delta, k);
  if (h.kind == GroupKind::GenericTube || is_exact_zero(h.mu)) {
    T.f().add(1, 0, lin - S(1));
    T.g().add(0, 1, dk - S(1));
    return T;
  }
  const int l = k / 2;
  // (1 + mu w)^{-1/l} = sum_n binom(-1/l, n) mu^n w^n.
  mpq_class b = 1;
  S mun(1);
  for (int n = 0; 1 + k * n <= T.f_trunc(); ++n) {
    if (n > 0) {
      b *= mpq_class(-1, l) - (n - 1);
      b /= n;
      mun = mun * h.mu;
    }
    S c = lin * S::from_rational(b) * mun;
    if (n == 0) c = c - S(1);
    T.f().add(1, n, c);
  }
  // w / (1 + mu w) = sum_n (-mu)^n w^{n+1}.
  S mn(1);
  for (int n = 0; k * (n + 1) <= W; ++n) {
    if (n > 0) mn = mn * (-h.mu);
    S c = dk * mn;
    if (n == 0) c = c - S(1);
    T.g().add(0, n + 1, c);
  }
  return T;
}

// ---------------------------------------------------------------------------
// Action.

template <Scalar S>
void require_matching_group(const ModelPolynomial<S>& M, const SymmetryElement<S>& h) {
  if (group_kind_of(M.cls) != h.kind || M.k != h.k)
    throw InputError(std::string("symmetry element (") + group_kind_name(h.kind) + ", k = " + std::to_string(h.k) +
                     ") does not match the model (" + class_name(M.cls) + ", k = " + std::to_string(M.k) + ")");
}

// Applies h to a normal form and renormalizes; returns the full result.
template <Scalar S>
NormalFormResult<S> act_full(const SurfaceSeries<S>& nf, const SymmetryElement<S>& h, int W) {
  const auto M = extract_model(nf);
  require_matching_group(M, h);
  W = std::min(W, nf.trunc());
  auto moved = apply_map(nf, to_map(h, W), W);
  NormalizeOptions opts;
  opts.verify_round_trip = false;
  return normalize(moved, W, opts);
}

template <Scalar S>
SurfaceSeries<S> act(const SurfaceSeries<S>& nf, const SymmetryElement<S>& h, int W) {
  return act_full(nf, h, W).nf;
}

// Diagonal relation between a normal form and its GenericTube image on the
// sector i + j < k - 1 (tail weights above k): b = delta^{k-w} e^{-i(i-j)theta} a.
template <Scalar S>
bool diagonal_relation_holds(const SurfaceSeries<S>& a, const SurfaceSeries<S>& b, const SymmetryElement<S>& h,
                             int W, std::string* why = nullptr) {
  const int k = h.k;
  W = std::min({W, a.trunc(), b.trunc()});
  const Grading gr{k};
  for (int m = 0; k * m <= W; ++m)
    for (int i = 0; i + k * m <= W; ++i)
      for (int j = 0; j <= i && i + j < k - 1; ++j) {
        const int w = gr.weight(i, j, m);
        if (w <= k || w > W) continue;
        const S want = power(h.delta, k - w) * power(conj(h.phase), i - j) * a.coeff(i, j, m);
        if (!near(want, b.coeff(i, j, m))) {
          if (why) *why = "(" + std::to_string(i) + "," + std::to_string(j) + "," + std::to_string(m) + ")";
          return false;
        }
      }
  return true;
}

// ---------------------------------------------------------------------------
// Equivalence.

enum class Outcome { Equivalent, NotEquivalent, Indeterminate };

inline const char* outcome_name(Outcome o) {
  switch (o) {
    case Outcome::Equivalent: return "Equivalent";
    case Outcome::NotEquivalent: return "NotEquivalent";
    case Outcome::Indeterminate: return "Indeterminate";
  }
  return "?";
}

template <Scalar S>
struct EquivalenceVerdict {
  Outcome outcome = Outcome::Indeterminate;
  std::optional<SymmetryElement<S>> witness;
  std::string reason;
  int W = 0;
  int candidates_tried = 0;
};

namespace detail {

template <Scalar S>
struct TailEntry {
  int w, i, j, m;
  S a, b;
};

// Union of tail keys (weight > k) of two series to weight W, by weight.
template <Scalar S>
std::vector<TailEntry<S>> tail_pairs(const SurfaceSeries<S>& A, const SurfaceSeries<S>& B, int k, int W) {
  std::map<Mono3, int> keys;
  for (const auto* X : {&A, &B})
    for (const auto& [key, c] : X->half())
      if (key.w > k && key.w <= W && !is_zero(c)) keys.emplace(key, 0);
  std::vector<TailEntry<S>> out;
  for (const auto& [key, unused] : keys)
    out.push_back({key.w, key.i, key.j, key.m, A.coeff(key.i, key.j, key.m), B.coeff(key.i, key.j, key.m)});
  return out;
}

template <Scalar S>
bool verify_witness(const SurfaceSeries<S>& nf1, const SurfaceSeries<S>& nf2, const SymmetryElement<S>& h, int W) {
  try {
    return act(nf1, h, W).truncated(W).near_equal(nf2.truncated(W));
  } catch (const NeedsApproxBackend&) {
    return false;
  }
}

template <Scalar S>
SurfaceSeries<S> difference(const SurfaceSeries<S>& a, const SurfaceSeries<S>& b) {
  return SurfaceSeries<S>::from_poly(a.to_poly() - b.to_poly(), false);
}

template <Scalar S>
int lowest_nonzero_weight(const SurfaceSeries<S>& X, int W) {
  for (const auto& [key, c] : X.half())
    if (key.w <= W && !is_zero(c)) return key.w;
  return W + 1;
}

template <Scalar S>
bool positive_real(const S& x) {
  return is_real(x) && sign(x) > 0;
}

}  // namespace detail

// Decides whether two normal forms are related by an element of H to weight W.
template <Scalar S>
EquivalenceVerdict<S> equivalence(const SurfaceSeries<S>& nf1, const SurfaceSeries<S>& nf2, int W) {
  EquivalenceVerdict<S> v;
  if (W > nf1.trunc() || W > nf2.trunc())
    throw InputError("equivalence: weight " + std::to_string(W) + " exceeds an input truncation (" +
                     std::to_string(nf1.trunc()) + ", " + std::to_string(nf2.trunc()) + ")");
  v.W = W;
  if (!nf1.grading().weighted() || !nf2.grading().weighted())
    throw InputError("equivalence: inputs must be weighted normal forms");
  const auto M1 = extract_model(nf1), M2 = extract_model(nf2);
  if (M1.k != M2.k) {
    v.outcome = Outcome::NotEquivalent;
    v.reason = "model mismatch: type " + std::to_string(M1.k) + " vs " + std::to_string(M2.k);
    return v;
  }
  const int k = M1.k;
  if (M1.cls != M2.cls || M1.l != M2.l || !M1.poly(k).near_equal(M2.poly(k))) {
    v.outcome = Outcome::NotEquivalent;
    v.reason = std::string("model mismatch: ") + class_name(M1.cls) + " P = " + M1.poly(k).to_string() + " vs " +
               class_name(M2.cls) + " P = " + M2.poly(k).to_string();
    return v;
  }
  for (const auto* X : {&nf1, &nf2})
    if (!check_normal_form(*X, M1, W).pass) throw InputError("equivalence: input is not in normal form to weight " + std::to_string(W));

  const auto tail = detail::tail_pairs(nf1, nf2, k, W);
  if (tail.empty()) {
    v.outcome = Outcome::Equivalent;
    v.witness = identity_element(M1);
    v.reason = "both series equal the model to weight " + std::to_string(W);
    return v;
  }
  std::vector<SymmetryElement<S>> found;
  std::string indeterminate;

  auto try_candidate = [&](const SymmetryElement<S>& h) {
    ++v.candidates_tried;
    if (detail::verify_witness(nf1, nf2, h, W)) found.push_back(h);
  };

  if (M1.cls != ModelClass::Circular) {
    // Diagonal action: b = delta^{k-w} e^{-i(i-j)theta} a for every coefficient.
    const auto& e = tail.front();
    if (is_zero(e.a) || is_zero(e.b)) {
      v.outcome = Outcome::NotEquivalent;
      v.reason = "coefficient (" + std::to_string(e.i) + "," + std::to_string(e.j) + "," + std::to_string(e.m) +
                 ") vanishes in only one series";
      return v;
    }
    const int n = e.w - k;
    for (int rho = 0; rho < M1.L; ++rho) {
      auto ph = root_of_unity<S>(rho, M1.L);
      if (!ph) {
        indeterminate = "rotation of order " + std::to_string(M1.L) + " needs the approx backend";
        continue;
      }
      // delta^{-n} = b e^{i(i-j)theta} / a.
      const S val = e.b * power(*ph, e.i - e.j) / e.a;
      if (!is_real(val)) continue;
      for (int sg : (k % 2 == 1) ? std::vector<int>{1, -1} : std::vector<int>{1}) {
        const int want_sign = (n % 2 == 0) ? 1 : sg;
        if (sign(val) != want_sign) continue;
        auto r = real_root(want_sign > 0 ? S(1) / val : S(-1) / val, n);
        if (!r) {
          indeterminate = "dilation factor is irrational; re-run with the approx backend";
          continue;
        }
        const S delta = sg > 0 ? *r : -*r;
        try_candidate(generic_tube_element(M1, delta, rho));
      }
    }
  } else {
    auto lowest_tail = [&](const SurfaceSeries<S>& X) {
      for (const auto& [key, c] : X.half())
        if (key.w > k && key.w <= W && !is_zero(c)) return key.w;
      return W + 1;
    };
    const int t1 = lowest_tail(nf1), t2 = lowest_tail(nf2);
    if (t1 != t2) {
      v.outcome = Outcome::NotEquivalent;
      v.reason = "lowest tail weights differ (" + std::to_string(t1) + " vs " + std::to_string(t2) + ")";
      return v;
    }
    const int w0 = t1;
    // delta from a coefficient at the lowest tail weight.
    const detail::TailEntry<S>* e0 = nullptr;
    for (const auto& e : tail)
      if (e.w == w0 && !is_zero(e.a)) {
        e0 = &e;
        break;
      }
    if (!e0 || is_zero(e0->b)) {
      v.outcome = Outcome::NotEquivalent;
      v.reason = "lowest-weight tail coefficients vanish in only one series";
      return v;
    }
    auto dr = real_root(norm2(e0->a) / norm2(e0->b), 2 * (w0 - k));
    if (!dr) {
      v.outcome = Outcome::Indeterminate;
      v.reason = "dilation factor is irrational; re-run with the approx backend";
      return v;
    }
    const S delta = *dr;
    // Phase from the lowest coefficient with i != j below the first weight the mu-family reaches.
    std::vector<S> phases;
    bool pinned = false;
    for (const auto& e : tail) {
      if (e.w >= w0 + k) break;
      if (e.i == e.j || is_zero(e.a)) continue;
      if (is_zero(e.b)) {
        v.outcome = Outcome::NotEquivalent;
        v.reason = "coefficient (" + std::to_string(e.i) + "," + std::to_string(e.j) + "," + std::to_string(e.m) +
                   ") vanishes in only one series";
        return v;
      }
      const S c = e.b / (power(delta, k - e.w) * e.a);  // e^{-i(i-j)theta}
      if (!is_zero(norm2(c) - S(1))) {
        v.outcome = Outcome::NotEquivalent;
        v.reason = "coefficient moduli are inconsistent with a single dilation";
        return v;
      }
      bool complete = true;
      phases = complex_roots(conj(c), e.i - e.j, &complete);
      if (!complete) indeterminate = "rotation is not a Gaussian rational; re-run with the approx backend";
      pinned = true;
      break;
    }
    if (!pinned) {
      phases = {S(1)};
      indeterminate = "rotation is not pinned below weight " + std::to_string(w0 + k);
    }
    for (const auto& ph : phases) {
      auto diag = circular_element<S>(k, delta, ph, S(0));
      const auto D = act(nf1, diag, W);
      ++v.candidates_tried;
      if (D.truncated(W).near_equal(nf2.truncated(W))) {
        found.push_back(diag);
        continue;
      }
      // act(D, mu) = D + mu V at the first weight the mu-family reaches.
      const auto V = detail::difference(act(D, circular_element<S>(k, S(1), S(1), S(1)), W), D);
      const auto Dif = detail::difference(nf2.truncated(W), D.truncated(W));
      const int ws = detail::lowest_nonzero_weight(V, W);
      const int wd = detail::lowest_nonzero_weight(Dif, W);
      if (ws > W || wd < ws) continue;
      const S* best = nullptr;
      HighReal bestmag = -1;
      Mono3 bestkey{};
      for (const auto& [key, c] : V.half())
        if (key.w == ws && magnitude(c) > bestmag) {
          bestmag = magnitude(c);
          best = &c;
          bestkey = key;
        }
      const S mu0 = Dif.coeff(bestkey.i, bestkey.j, bestkey.m) / *best;
      if (!is_real(mu0)) continue;
      try_candidate(compose(circular_element<S>(k, S(1), S(1), real_part(mu0)), diag));
    }
  }

  if (!found.empty()) {
    v.outcome = Outcome::Equivalent;
    v.witness = found.front();
    v.reason = "witness verified by acting and renormalizing to weight " + std::to_string(W);
    return v;
  }
  if (!indeterminate.empty()) {
    v.outcome = Outcome::Indeterminate;
    v.reason = indeterminate;
    return v;
  }
  v.outcome = Outcome::NotEquivalent;
  v.reason = "no element of H maps the first normal form to the second to weight " + std::to_string(W);
  return v;
}

// ---------------------------------------------------------------------------
// Stability group.

struct StabilityEstimate {
  int estimate = 0;  // dimension of the subgroup of H fixing the normal form to weight W
  int bound = 0;     // unconditional bound: 3 for the circular model, 1 otherwise
  int W = 0;
};

namespace detail {

// d/dmu at 0 of act(nf, (1, 1, mu)), from exact samples mu = 0..d.
template <Scalar S>
Poly3<S> mu_derivative(const SurfaceSeries<S>& nf, int k, int W, int d) {
  Poly3<S> out(Grading{k}, W);
  for (int j = 0; j <= d; ++j) {
    // Derivative at 0 of the Lagrange basis polynomial for node j.
    mpq_class c = 0;
    if (j == 0) {
      for (int m = 1; m <= d; ++m) c -= mpq_class(1, m);
    } else {
      c = mpq_class(1, j);
      for (int m = 1; m <= d; ++m)
        if (m != j) c *= mpq_class(-m, j - m);
    }
    const auto X = j == 0 ? nf.truncated(W) : act(nf, circular_element<S>(k, S(1), S(1), S(j)), W);
    out += X.to_poly().truncated(W).with_trunc(W) * S::from_rational(c);
  }
  return out;
}

}  // namespace detail

template <Scalar S>
StabilityEstimate stability_dimension(const SurfaceSeries<S>& nf, int W) {
  StabilityEstimate st;
  W = std::min(W, nf.trunc());
  st.W = W;
  const auto M = extract_model(nf);
  const int k = M.k;
  if (!check_normal_form(nf, M, W).pass) throw InputError("stability_dimension: input is not in normal form");
  const bool circ = M.cls == ModelClass::Circular;
  st.bound = circ ? 3 : 1;

  // Infinitesimal generators evaluated on the tail.
  std::vector<Poly3<S>> gens;
  const Poly3<S> tail = [&] {
    Poly3<S> p(Grading{k}, W);
    const Poly3<S> full = nf.to_poly();
    for (const auto& [key, c] : full.terms())
      if (key.w > k && key.w <= W) p.add_key(key, c);
    return p;
  }();
  Poly3<S> gd(Grading{k}, W), gt(Grading{k}, W);
  for (const auto& [key, c] : tail.terms()) {
    gd.add_key(key, c * S(k - key.w));
    gt.add_key(key, c * S::imag_unit() * S(-(key.i - key.j)));
  }
  gens.push_back(gd);
  if (circ) {
    gens.push_back(gt);
    const int w0 = tail.min_weight();
    const int d = w0 > W ? 1 : std::max(1, (W - w0) / k);
    gens.push_back(w0 > W ? Poly3<S>(Grading{k}, W) : detail::mu_derivative(nf, k, W, d));
  }

  std::map<Mono3, int> keys;
  for (const auto& g : gens)
    for (const auto& [key, c] : g.terms()) keys.emplace(key, 0);
  using RT = RealTraits<S>;
  Matrix<RealOf<S>> A;
  for (const auto& [key, unused] : keys) {
    std::vector<RealOf<S>> re, im;
    for (const auto& g : gens) {
      const S c = g.coeff(key.i, key.j, key.m);
      re.push_back(RT::from(real_part(c)));
      im.push_back(RT::from(imag_part(c)));
    }
    A.push_back(re);
    A.push_back(im);
  }
  st.estimate = static_cast<int>(gens.size()) - matrix_rank<S>(A);
  return st;
}

}  // namespace crnf
