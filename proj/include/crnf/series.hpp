#pragma once

// Truncated graded series.
//
// Poly3      : polynomial in (z, zbar, u), no reality assumption.
// HoloSeries : holomorphic polynomial in (z, w).
// SurfaceSeries : real series F(z, zbar, u) stored as the i >= j half.
// MapSeries  : a coordinate change z* = z + f(z,w), w* = w + g(z,w).
//
// Grading: weight(z) = weight(zbar) = 1 and weight(u) = weight(w) = k. k = 0
// is the pre-type mode where every variable has weight 1 (ordinary degree).
// Every container carries a truncation bound and silently drops monomials
// above it.

#include <algorithm>
#include <compare>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "crnf/errors.hpp"
#include "crnf/scalar.hpp"

namespace crnf {

inline long binomial(int n, int r) {
  if (r < 0 || r > n) return 0;
  long out = 1;
  for (int t = 1; t <= r; ++t) out = out * (n - r + t) / t;
  return out;
}

struct Grading {
  int k = 0;

  int u_weight() const { return k > 0 ? k : 1; }
  int weight(int i, int j, int m) const { return i + j + u_weight() * m; }
  int holo_weight(int i, int j) const { return i + u_weight() * j; }
  bool weighted() const { return k > 0; }
  friend bool operator==(const Grading&, const Grading&) = default;
};

struct Mono3 {
  int w, i, j, m;
  auto operator<=>(const Mono3&) const = default;
};

struct Mono2 {
  int w, i, j;
  auto operator<=>(const Mono2&) const = default;
};

inline void require_same_grading(const Grading& a, const Grading& b, const char* where) {
  if (!(a == b))
    throw InputError(std::string(where) + ": grading mismatch (k=" + std::to_string(a.k) + " vs k=" +
                     std::to_string(b.k) + ")");
}

// ---------------------------------------------------------------------------

template <Scalar S>
class Poly3 {
 public:
  using Terms = std::map<Mono3, S>;

  Poly3() = default;
  Poly3(Grading g, int trunc) : grading_(g), trunc_(trunc) {}

  static Poly3 monomial(Grading g, int trunc, int i, int j, int m, const S& c) {
    Poly3 p(g, trunc);
    p.add(i, j, m, c);
    return p;
  }
  static Poly3 constant(Grading g, int trunc, const S& c) { return monomial(g, trunc, 0, 0, 0, c); }

  const Grading& grading() const { return grading_; }
  int trunc() const { return trunc_; }
  const Terms& terms() const { return terms_; }
  bool empty() const { return terms_.empty(); }
  std::size_t size() const { return terms_.size(); }

  Mono3 key(int i, int j, int m) const { return {grading_.weight(i, j, m), i, j, m}; }

  S coeff(int i, int j, int m) const {
    auto it = terms_.find(key(i, j, m));
    return it == terms_.end() ? S(0) : it->second;
  }

  void add(int i, int j, int m, const S& c) { add_key(key(i, j, m), c); }

  void add_key(const Mono3& k, const S& c) {
    if (k.w > trunc_ || is_exact_zero(c)) return;
    auto [it, inserted] = terms_.try_emplace(k, c);
    if (!inserted) {
      it->second += c;
      if (is_exact_zero(it->second)) terms_.erase(it);
    }
  }

  void set(int i, int j, int m, const S& c) {
    auto k = key(i, j, m);
    if (k.w > trunc_) return;
    if (is_exact_zero(c))
      terms_.erase(k);
    else
      terms_[k] = c;
  }

  int min_weight() const { return terms_.empty() ? trunc_ + 1 : terms_.begin()->first.w; }

  Poly3 slice(int w) const {
    Poly3 out(grading_, trunc_);
    for (auto it = terms_.lower_bound({w, -1, -1, -1}); it != terms_.end() && it->first.w == w; ++it)
      out.terms_.emplace(it->first, it->second);
    return out;
  }

  Poly3 truncated(int W) const {
    Poly3 out(grading_, std::min(W, trunc_));
    for (const auto& [k, c] : terms_) {
      if (k.w > out.trunc_) break;
      out.terms_.emplace(k, c);
    }
    return out;
  }

  Poly3 with_trunc(int W) const {
    Poly3 out = truncated(W);
    out.trunc_ = W;
    return out;
  }

  // Formal conjugation: swaps z and zbar and conjugates coefficients (u real).
  Poly3 conjugated() const {
    Poly3 out(grading_, trunc_);
    for (const auto& [k, c] : terms_) out.terms_.emplace(Mono3{k.w, k.j, k.i, k.m}, conj(c));
    return out;
  }

  Poly3 real_part() const {
    Poly3 out = *this + conjugated();
    return out * S::from_rational(mpq_class(1, 2));
  }
  Poly3 imag_part() const {
    Poly3 out = *this - conjugated();
    return out * (S::from_rational(0, mpq_class(-1, 2)));
  }

  Poly3 d_dz() const {
    Poly3 out(grading_, trunc_);
    for (const auto& [k, c] : terms_)
      if (k.i > 0) out.add(k.i - 1, k.j, k.m, c * S(k.i));
    return out;
  }
  Poly3 d_dzbar() const {
    Poly3 out(grading_, trunc_);
    for (const auto& [k, c] : terms_)
      if (k.j > 0) out.add(k.i, k.j - 1, k.m, c * S(k.j));
    return out;
  }

  Poly3& operator+=(const Poly3& o) {
    require_same_grading(grading_, o.grading_, "Poly3 +");
    trunc_ = std::min(trunc_, o.trunc_);
    drop_above_trunc();
    for (const auto& [k, c] : o.terms_) add_key(k, c);
    return *this;
  }
  Poly3& operator-=(const Poly3& o) {
    require_same_grading(grading_, o.grading_, "Poly3 -");
    trunc_ = std::min(trunc_, o.trunc_);
    drop_above_trunc();
    for (const auto& [k, c] : o.terms_) add_key(k, -c);
    return *this;
  }
  Poly3& operator*=(const S& s) {
    if (is_exact_zero(s)) {
      terms_.clear();
      return *this;
    }
    for (auto it = terms_.begin(); it != terms_.end();) {
      it->second *= s;
      if (is_exact_zero(it->second))
        it = terms_.erase(it);
      else
        ++it;
    }
    return *this;
  }

  friend Poly3 operator+(Poly3 a, const Poly3& b) { return a += b; }
  friend Poly3 operator-(Poly3 a, const Poly3& b) { return a -= b; }
  friend Poly3 operator*(Poly3 a, const S& s) { return a *= s; }
  friend Poly3 operator*(const S& s, Poly3 a) { return a *= s; }
  friend Poly3 operator-(Poly3 a) { return a *= S(-1); }

  friend Poly3 operator*(const Poly3& a, const Poly3& b) {
    require_same_grading(a.grading_, b.grading_, "Poly3 *");
    Poly3 out(a.grading_, std::min(a.trunc_, b.trunc_));
    for (const auto& [ka, ca] : a.terms_) {
      int room = out.trunc_ - ka.w;
      if (room < 0) break;
      for (const auto& [kb, cb] : b.terms_) {
        if (kb.w > room) break;
        auto [it, fresh] = out.terms_.try_emplace(Mono3{ka.w + kb.w, ka.i + kb.i, ka.j + kb.j, ka.m + kb.m});
        add_mul(it->second, ca, cb);
      }
    }
    out.drop_exact_zeros();
    return out;
  }

  bool near_equal(const Poly3& o) const {
    int W = std::min(trunc_, o.trunc_);
    auto a = truncated(W), b = o.truncated(W);
    for (const auto& [k, c] : a.terms_)
      if (!near(c, b.coeff(k.i, k.j, k.m))) return false;
    for (const auto& [k, c] : b.terms_)
      if (!near(c, a.coeff(k.i, k.j, k.m))) return false;
    return true;
  }

  bool is_zero_poly() const {
    for (const auto& [k, c] : terms_)
      if (!is_zero(c)) return false;
    return true;
  }

  std::string to_string() const {
    std::ostringstream os;
    bool first = true;
    for (const auto& [k, c] : terms_) {
      if (!first) os << " + ";
      first = false;
      os << to_display(c) << "*z^" << k.i << "*zb^" << k.j << "*u^" << k.m;
    }
    if (first) os << "0";
    return os.str();
  }

 private:
  void drop_exact_zeros() {
    std::erase_if(terms_, [](const auto& kv) { return is_exact_zero(kv.second); });
  }
  void drop_above_trunc() {
    for (auto it = terms_.begin(); it != terms_.end();) {
      if (it->first.w > trunc_)
        it = terms_.erase(it);
      else
        ++it;
    }
  }

  Grading grading_{};
  int trunc_ = 0;
  Terms terms_;
};

// ---------------------------------------------------------------------------

template <Scalar S>
class HoloSeries {
 public:
  using Terms = std::map<Mono2, S>;

  HoloSeries() = default;
  HoloSeries(Grading g, int trunc) : grading_(g), trunc_(trunc) {}

  const Grading& grading() const { return grading_; }
  int trunc() const { return trunc_; }
  const Terms& terms() const { return terms_; }
  bool empty() const { return terms_.empty(); }
  Mono2 key(int i, int j) const { return {grading_.holo_weight(i, j), i, j}; }

  S coeff(int i, int j) const {
    auto it = terms_.find(key(i, j));
    return it == terms_.end() ? S(0) : it->second;
  }
  void add(int i, int j, const S& c) { add_key(key(i, j), c); }
  void add_key(const Mono2& k, const S& c) {
    if (k.w > trunc_ || is_exact_zero(c)) return;
    auto [it, inserted] = terms_.try_emplace(k, c);
    if (!inserted) {
      it->second += c;
      if (is_exact_zero(it->second)) terms_.erase(it);
    }
  }
  void set(int i, int j, const S& c) {
    auto k = key(i, j);
    if (k.w > trunc_) return;
    if (is_exact_zero(c))
      terms_.erase(k);
    else
      terms_[k] = c;
  }

  HoloSeries slice(int w) const {
    HoloSeries out(grading_, trunc_);
    for (auto it = terms_.lower_bound({w, -1, -1}); it != terms_.end() && it->first.w == w; ++it)
      out.terms_.emplace(it->first, it->second);
    return out;
  }
  HoloSeries truncated(int W) const {
    HoloSeries out(grading_, std::min(W, trunc_));
    for (const auto& [k, c] : terms_) {
      if (k.w > out.trunc_) break;
      out.terms_.emplace(k, c);
    }
    return out;
  }
  HoloSeries with_trunc(int W) const {
    HoloSeries out = truncated(W);
    out.trunc_ = W;
    return out;
  }

  // n-th derivative in w.
  HoloSeries d_dw(int n = 1) const {
    HoloSeries out(grading_, trunc_);
    for (const auto& [k, c] : terms_) {
      if (k.j < n) continue;
      long f = 1;
      for (int t = 0; t < n; ++t) f *= (k.j - t);
      out.add(k.i, k.j - n, c * S(f));
    }
    return out;
  }

  // w -> u: the holomorphic series as a (z, zbar, u) polynomial.
  Poly3<S> as_poly3(int trunc) const {
    Poly3<S> out(grading_, trunc);
    for (const auto& [k, c] : terms_) out.add(k.i, 0, k.j, c);
    return out;
  }

  int max_w_degree() const {
    int d = 0;
    for (const auto& [k, c] : terms_) d = std::max(d, k.j);
    return d;
  }

  HoloSeries& operator+=(const HoloSeries& o) {
    require_same_grading(grading_, o.grading_, "HoloSeries +");
    trunc_ = std::min(trunc_, o.trunc_);
    *this = truncated(trunc_);
    for (const auto& [k, c] : o.terms_) add_key(k, c);
    return *this;
  }
  HoloSeries& operator-=(const HoloSeries& o) {
    require_same_grading(grading_, o.grading_, "HoloSeries -");
    trunc_ = std::min(trunc_, o.trunc_);
    *this = truncated(trunc_);
    for (const auto& [k, c] : o.terms_) add_key(k, -c);
    return *this;
  }
  HoloSeries& operator*=(const S& s) {
    Terms t;
    for (auto& [k, c] : terms_) {
      S v = c * s;
      if (!is_exact_zero(v)) t.emplace(k, std::move(v));
    }
    terms_ = std::move(t);
    return *this;
  }
  friend HoloSeries operator+(HoloSeries a, const HoloSeries& b) { return a += b; }
  friend HoloSeries operator-(HoloSeries a, const HoloSeries& b) { return a -= b; }
  friend HoloSeries operator*(HoloSeries a, const S& s) { return a *= s; }
  friend HoloSeries operator*(const HoloSeries& a, const HoloSeries& b) {
    require_same_grading(a.grading_, b.grading_, "HoloSeries *");
    HoloSeries out(a.grading_, std::min(a.trunc_, b.trunc_));
    for (const auto& [ka, ca] : a.terms_) {
      int room = out.trunc_ - ka.w;
      if (room < 0) break;
      for (const auto& [kb, cb] : b.terms_) {
        if (kb.w > room) break;
        out.add_key(Mono2{ka.w + kb.w, ka.i + kb.i, ka.j + kb.j}, ca * cb);
      }
    }
    return out;
  }

  bool near_equal(const HoloSeries& o, int W) const {
    for (const auto& [k, c] : terms_)
      if (k.w <= W && !near(c, o.coeff(k.i, k.j))) return false;
    for (const auto& [k, c] : o.terms_)
      if (k.w <= W && !near(c, coeff(k.i, k.j))) return false;
    return true;
  }

  std::string to_string() const {
    std::ostringstream os;
    bool first = true;
    for (const auto& [k, c] : terms_) {
      if (!first) os << " + ";
      first = false;
      os << to_display(c) << "*z^" << k.i << "*w^" << k.j;
    }
    if (first) os << "0";
    return os.str();
  }

 private:
  Grading grading_{};
  int trunc_ = 0;
  Terms terms_;
};

// ---------------------------------------------------------------------------

// Which normalizations have been applied to a SurfaceSeries.
struct SeriesFlags {
  bool harmonics_removed = false;  // u = 0 slice free of harmonic terms through degree k
  bool model_normalized = false;   // a_l = 1 and the argument conditions hold
};

template <Scalar S>
class SurfaceSeries {
 public:
  using Terms = std::map<Mono3, S>;

  SurfaceSeries() = default;
  SurfaceSeries(Grading g, int trunc) : grading_(g), trunc_(trunc) {}

  // Builds from a full table. Throws if the table is not real (within
  // tolerance for the approx backend) or has terms of total degree < 2.
  static SurfaceSeries from_poly(const Poly3<S>& p, bool check = true) {
    SurfaceSeries out(p.grading(), p.trunc());
    for (const auto& [k, c] : p.terms()) {
      if (check && k.i + k.j + k.m < 2 && !is_zero(c))
        throw InputError("term of total degree < 2 at (" + std::to_string(k.i) + "," + std::to_string(k.j) +
                         "," + std::to_string(k.m) + ")");
      if (k.i != k.j && check && !near(c, conj(p.coeff(k.j, k.i, k.m))))
        throw InvariantViolation("reality violated at (" + std::to_string(k.i) + "," + std::to_string(k.j) +
                                 "," + std::to_string(k.m) + ")");
      if (k.i < k.j) continue;
      if (k.i == k.j) {
        if (check && !is_real(c))
          throw InvariantViolation("diagonal coefficient not real at (" + std::to_string(k.i) + "," +
                                   std::to_string(k.j) + "," + std::to_string(k.m) + ")");
        out.terms_.emplace(k, real_part(c));
      } else {
        out.terms_.emplace(k, c);
      }
    }
    return out;
  }

  const Grading& grading() const { return grading_; }
  int trunc() const { return trunc_; }
  int k() const { return grading_.k; }
  const Terms& half() const { return terms_; }
  SeriesFlags& flags() { return flags_; }
  const SeriesFlags& flags() const { return flags_; }

  Mono3 key(int i, int j, int m) const { return {grading_.weight(i, j, m), i, j, m}; }

  // Coefficient of z^i zbar^j u^m of the full real series.
  S coeff(int i, int j, int m) const {
    if (i < j) return conj(coeff(j, i, m));
    auto it = terms_.find(key(i, j, m));
    return it == terms_.end() ? S(0) : it->second;
  }

  // Sets a coefficient with i >= j (the conjugate entry follows).
  void set(int i, int j, int m, const S& c) {
    if (i < j) throw InputError("store conjugate-upper index only (i >= j)");
    if (i == j && !is_real(c)) throw InputError("diagonal coefficient must be real");
    auto k = key(i, j, m);
    if (k.w > trunc_) return;
    if (is_exact_zero(c))
      terms_.erase(k);
    else
      terms_[k] = (i == j) ? real_part(c) : c;
  }

  Poly3<S> to_poly() const {
    Poly3<S> p(grading_, trunc_);
    for (const auto& [k, c] : terms_) {
      p.add_key(k, c);
      if (k.i != k.j) p.add_key(Mono3{k.w, k.j, k.i, k.m}, conj(c));
    }
    return p;
  }

  int min_weight() const { return terms_.empty() ? trunc_ + 1 : terms_.begin()->first.w; }

  SurfaceSeries slice(int w) const {
    SurfaceSeries out(grading_, trunc_);
    for (auto it = terms_.lower_bound({w, -1, -1, -1}); it != terms_.end() && it->first.w == w; ++it)
      out.terms_.emplace(it->first, it->second);
    return out;
  }
  SurfaceSeries truncated(int W) const {
    SurfaceSeries out(grading_, std::min(W, trunc_));
    out.flags_ = flags_;
    for (const auto& [k, c] : terms_) {
      if (k.w > out.trunc_) break;
      out.terms_.emplace(k, c);
    }
    return out;
  }

  // Reinterprets the series under another grading, keeping monomials of new
  // weight <= W.
  SurfaceSeries regraded(Grading g, int W) const {
    SurfaceSeries out(g, W);
    out.flags_ = flags_;
    for (const auto& [k, c] : terms_) {
      Mono3 nk{g.weight(k.i, k.j, k.m), k.i, k.j, k.m};
      if (nk.w <= W) out.terms_.emplace(nk, c);
    }
    return out;
  }

  SurfaceSeries& operator+=(const SurfaceSeries& o) {
    require_same_grading(grading_, o.grading_, "SurfaceSeries +");
    *this = truncated(std::min(trunc_, o.trunc_));
    for (const auto& [k, c] : o.terms_) add_half(k, c);
    return *this;
  }
  SurfaceSeries& operator-=(const SurfaceSeries& o) {
    require_same_grading(grading_, o.grading_, "SurfaceSeries -");
    *this = truncated(std::min(trunc_, o.trunc_));
    for (const auto& [k, c] : o.terms_) add_half(k, -c);
    return *this;
  }
  // Real multiples only keep the series real.
  SurfaceSeries& operator*=(const S& s) {
    if (!is_real(s)) throw InputError("SurfaceSeries scaled by a non-real scalar");
    Terms t;
    S r = real_part(s);
    for (auto& [k, c] : terms_) {
      S v = c * r;
      if (!is_exact_zero(v)) t.emplace(k, std::move(v));
    }
    terms_ = std::move(t);
    return *this;
  }
  friend SurfaceSeries operator+(SurfaceSeries a, const SurfaceSeries& b) { return a += b; }
  friend SurfaceSeries operator-(SurfaceSeries a, const SurfaceSeries& b) { return a -= b; }
  friend SurfaceSeries operator*(SurfaceSeries a, const S& s) { return a *= s; }
  friend SurfaceSeries operator*(const SurfaceSeries& a, const SurfaceSeries& b) {
    return from_poly(a.to_poly() * b.to_poly(), false);
  }

  bool near_equal(const SurfaceSeries& o) const {
    int W = std::min(trunc_, o.trunc_);
    for (const auto& [k, c] : terms_)
      if (k.w <= W && !near(c, o.coeff(k.i, k.j, k.m))) return false;
    for (const auto& [k, c] : o.terms_)
      if (k.w <= W && !near(c, coeff(k.i, k.j, k.m))) return false;
    return true;
  }

  bool is_zero_series() const {
    for (const auto& [k, c] : terms_)
      if (!is_zero(c)) return false;
    return true;
  }

  std::string to_string() const { return to_poly().to_string(); }

 private:
  void add_half(const Mono3& k, const S& c) {
    if (k.w > trunc_ || is_exact_zero(c)) return;
    auto [it, inserted] = terms_.try_emplace(k, c);
    if (!inserted) {
      it->second += c;
      if (is_exact_zero(it->second)) terms_.erase(it);
    }
  }

  Grading grading_{};
  int trunc_ = 0;
  Terms terms_;
  SeriesFlags flags_;
};

// ---------------------------------------------------------------------------

template <Scalar S>
class MapSeries {
 public:
  MapSeries() = default;
  // f is kept to weight W - u_weight + 1 (the part that can influence F* to
  // weight W), g to weight W.
  MapSeries(Grading g, int W)
      : grading_(g), trunc_(W), f_(g, f_trunc_for(g, W)), g_(g, W) {}
  MapSeries(Grading gr, int W, HoloSeries<S> f, HoloSeries<S> g) : MapSeries(gr, W) {
    require_same_grading(gr, f.grading(), "MapSeries f");
    require_same_grading(gr, g.grading(), "MapSeries g");
    f_ = f.with_trunc(f_trunc_for(gr, W));
    g_ = g.with_trunc(W);
  }

  static int f_trunc_for(Grading g, int W) { return g.weighted() ? W - g.k + 1 : W; }
  static MapSeries identity(Grading g, int W) { return MapSeries(g, W); }

  const Grading& grading() const { return grading_; }
  int trunc() const { return trunc_; }
  int f_trunc() const { return f_trunc_for(grading_, trunc_); }
  const HoloSeries<S>& f() const { return f_; }
  const HoloSeries<S>& g() const { return g_; }
  HoloSeries<S>& f() { return f_; }
  HoloSeries<S>& g() { return g_; }

  bool is_identity() const { return f_.empty() && g_.empty(); }

  MapSeries truncated(int W) const { return MapSeries(grading_, std::min(W, trunc_), f_, g_); }

  // Graph-form conditions: no constant terms, g_z = 0 and Im g_w = 0 at 0.
  std::string violation_graph_form() const {
    if (!is_zero(f_.coeff(0, 0))) return "f has a constant term";
    if (!is_zero(g_.coeff(0, 0))) return "g has a constant term";
    if (!is_zero(g_.coeff(1, 0))) return "g_z(0) != 0";
    if (!is_real(g_.coeff(0, 1))) return "Im g_w(0) != 0";
    return {};
  }
  // Conditions keeping the harmonic-free form: d^j g / dz^j = 0 for 2 <= j <= k.
  std::string violation_harmonic_free() const {
    for (int j = 2; j <= grading_.k; ++j)
      if (!is_zero(g_.coeff(j, 0))) return "g has a z^" + std::to_string(j) + " term";
    return {};
  }
  // Membership in the normalized group: f of weight >= 2, g of weight >= k+1,
  // and, with `circular`, Re g_{02} = 0.
  std::string violation_normalized(bool circular) const {
    if (!grading_.weighted()) return "normalized maps require a weighted grading";
    for (const auto& [k, c] : f_.terms())
      if (k.w < 2 && !is_zero(c)) return "f has a term of weight < 2";
    for (const auto& [k, c] : g_.terms())
      if (k.w <= grading_.k && !is_zero(c)) return "g has a term of weight <= k";
    if (circular && !is_zero(real_part(g_.coeff(0, 2)))) return "Re g_02 != 0";
    return {};
  }

  bool near_equal(const MapSeries& o) const {
    int W = std::min(trunc_, o.trunc_);
    return f_.near_equal(o.f_, f_trunc_for(grading_, W)) && g_.near_equal(o.g_, W);
  }

 private:
  Grading grading_{};
  int trunc_ = 0;
  HoloSeries<S> f_;
  HoloSeries<S> g_;
};

// ---------------------------------------------------------------------------

// phi(z, u + i*P) = sum_n i^n phi^{(n)}(z, u) P^n / n!, truncated at W and at
// n <= order (order < 0: as far as the w-degree of phi requires).
template <Scalar S>
Poly3<S> expand_u_shift(const HoloSeries<S>& phi, const Poly3<S>& body, int W, int order = -1) {
  require_same_grading(phi.grading(), body.grading(), "expand_u_shift");
  int nmax = phi.max_w_degree();
  if (order >= 0) nmax = std::min(nmax, order);
  Poly3<S> out(phi.grading(), W);
  Poly3<S> body_pow = Poly3<S>::constant(phi.grading(), W, S(1));
  S in = S(1);  // i^n / n!
  const S I = S::imag_unit();
  for (int n = 0; n <= nmax; ++n) {
    if (n > 0) {
      body_pow = body_pow * body.truncated(W);
      in = in * I / S(n);
    }
    if (body_pow.empty()) break;
    Poly3<S> deriv = phi.d_dw(n).as_poly3(W);
    if (deriv.empty()) continue;
    out += (deriv * body_pow) * in;
  }
  return out;
}

}  // namespace crnf
