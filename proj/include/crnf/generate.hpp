#pragma once

// Deterministic generators for models, random tails and random maps.

#include <cstdint>
#include <random>

#include "crnf/model.hpp"
#include "crnf/series.hpp"

namespace crnf {

using Rng = std::mt19937_64;

// Small random rational p/q with |p| <= num_bound, 1 <= q <= den_bound.
inline mpq_class random_rational(Rng& rng, int num_bound = 5, int den_bound = 4) {
  std::uniform_int_distribution<int> num(-num_bound, num_bound), den(1, den_bound);
  mpq_class q(num(rng), den(rng));
  q.canonicalize();
  return q;
}

template <Scalar S>
S random_scalar(Rng& rng, bool real_only = false, int num_bound = 5, int den_bound = 4) {
  mpq_class re = random_rational(rng, num_bound, den_bound);
  mpq_class im = real_only ? mpq_class(0) : random_rational(rng, num_bound, den_bound);
  return S::from_rational(re, im);
}

// Random real series with monomials of weight in [wmin, W] (stored half
// i >= j), each present with probability `density`.
template <Scalar S>
SurfaceSeries<S> random_tail(Grading gr, int wmin, int W, Rng& rng, double density = 0.5) {
  SurfaceSeries<S> out(gr, W);
  std::bernoulli_distribution keep(density);
  const int uw = gr.u_weight();
  for (int m = 0; m * uw <= W; ++m)
    for (int i = 0; i + uw * m <= W; ++i)
      for (int j = 0; j <= i && i + j + uw * m <= W; ++j) {
        int w = gr.weight(i, j, m);
        if (w < wmin || i + j + m < 2 || !keep(rng)) continue;
        out.set(i, j, m, random_scalar<S>(rng, i == j));
      }
  return out;
}

// Random map in the normalized group: f of weight >= 2, g of weight >= k+1
// (g_{j0} = 0 automatically since j > k is allowed only above weight k),
// Re g_02 = 0 when `circular`.
template <Scalar S>
MapSeries<S> random_normalized_map(Grading gr, int W, Rng& rng, bool circular = false, double density = 0.4) {
  MapSeries<S> T(gr, W);
  std::bernoulli_distribution keep(density);
  const int k = gr.k;
  for (int j = 0; k * j <= T.f_trunc(); ++j)
    for (int i = 0; i + k * j <= T.f_trunc(); ++i)
      if (gr.holo_weight(i, j) >= 2 && keep(rng)) T.f().add(i, j, random_scalar<S>(rng));
  for (int j = 0; k * j <= W; ++j)
    for (int i = 0; i + k * j <= W; ++i) {
      if (gr.holo_weight(i, j) <= k || !keep(rng)) continue;
      if (j == 0 && i <= k) continue;
      S c = random_scalar<S>(rng);
      if (circular && i == 0 && j == 2) c = c - real_part(c);
      T.g().add(i, j, c);
    }
  return T;
}

// Random map satisfying the graph-form conditions (and, when weighted, the
// harmonic-free ones), including linear parts.
template <Scalar S>
MapSeries<S> random_admissible_map(Grading gr, int W, Rng& rng, double density = 0.4) {
  MapSeries<S> T(gr, W);
  std::bernoulli_distribution keep(density);
  const int uw = gr.u_weight();
  for (int j = 0; uw * j <= T.f_trunc(); ++j)
    for (int i = 0; i + uw * j <= T.f_trunc(); ++i)
      if (i + j >= 1 && keep(rng)) T.f().add(i, j, random_scalar<S>(rng));
  // Keep the linear part invertible.
  if (is_zero(S(1) + T.f().coeff(1, 0))) T.f().set(1, 0, S(0));
  for (int j = 0; uw * j <= W; ++j)
    for (int i = 0; i + uw * j <= W; ++i) {
      if (i + j < 1 || (i == 1 && j == 0) || !keep(rng)) continue;
      if (j == 0 && i <= gr.k) continue;
      bool real_only = (i == 0 && j == 1);
      S c = random_scalar<S>(rng, real_only);
      if (real_only && is_zero(S(1) + c)) continue;
      T.g().add(i, j, c);
    }
  return T;
}

// Random model already in normalized form (a_l = 1, argument conditions) of
// the requested class. Generic needs k >= 4.
template <Scalar S>
ModelPolynomial<S> random_normalized_model(ModelClass cls, int k, Rng& rng) {
  if (cls == ModelClass::Circular) {
    if (k % 2 != 0) throw InputError("circular models need even k");
    return circular_model<S>(k);
  }
  if (cls == ModelClass::Tube) return tube_model<S>(k);
  if (k < 4) throw InputError("every model with k = 3 is a tube");
  std::uniform_int_distribution<int> pick_l(1, (k - 1) / 2);
  std::bernoulli_distribution keep(0.6);
  for (int attempt = 0; attempt < 1000; ++attempt) {
    std::vector<S> a(k + 1, S(0));
    const int l = pick_l(rng);
    a[l] = S(1);
    for (int j = l + 1; 2 * j <= k; ++j)
      if (keep(rng)) a[j] = random_scalar<S>(rng, 2 * j == k);
    for (int j = 1; 2 * j < k; ++j) a[k - j] = conj(a[j]);
    auto M = model_from_coefficients<S>(k, a);
    if (M.cls != ModelClass::Generic) continue;
    bool ok = true;
    for (std::size_t i = 0; i + 1 < M.m.size() && ok; ++i) ok = detail::in_sector_exact(M.a[M.m[i + 1]], M.q[i]);
    if (ok) return M;
  }
  throw InvariantViolation("random_normalized_model: no generic sample found");
}

// Model plus a random tail of weights k+1..W.
template <Scalar S>
SurfaceSeries<S> random_surface(const ModelPolynomial<S>& M, int W, Rng& rng, double density = 0.4) {
  const Grading gr{M.k};
  SurfaceSeries<S> F = random_tail<S>(gr, M.k + 1, W, rng, density);
  for (int j = (M.k + 1) / 2; j < M.k; ++j) F.set(j, M.k - j, 0, M.a[j]);
  return F;
}

}  // namespace crnf
