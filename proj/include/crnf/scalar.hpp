#pragma once

// Coefficient backends.
//
// GaussianRational: exact complex numbers with arbitrary-precision rational
// real and imaginary parts. Comparisons are literal.
//
// BigComplex: complex numbers with MPFR big-float parts. Comparisons use the
// relative tolerance |x - y| <= eps * max(1, |x|, |y|). The working precision
// and eps are process-wide and must be set (set_approx_precision) before any
// BigComplex value is created.
//
// The two backends are distinct types; all series and algorithms are templates
// over the backend, so mixing them is a compile-time error.

#include <gmpxx.h>
#include <mpfr.h>

#include <boost/multiprecision/mpfr.hpp>

#include <cctype>
#include <cmath>
#include <concepts>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "crnf/errors.hpp"

namespace crnf {

namespace mp = boost::multiprecision;

// Fixed high precision (about 266 bits) used for candidate extraction and
// argument computations, independent of the approx backend's setting.
using HighReal = mp::number<mp::mpfr_float_backend<80>, mp::et_off>;
// Runtime-precision big float used by the approx backend.
using BigReal = mp::number<mp::mpfr_float_backend<0>, mp::et_off>;

enum class Backend { Exact, Approx };

inline const char* backend_name(Backend b) { return b == Backend::Exact ? "exact" : "approx"; }

// ---------------------------------------------------------------------------
// numeric helpers

inline HighReal to_high(const mpq_class& q) {
  HighReal h;
  mpfr_set_q(h.backend().data(), q.get_mpq_t(), MPFR_RNDN);
  return h;
}

inline mpq_class to_mpq(const HighReal& x) {
  mpq_class q;
  mpfr_get_q(q.get_mpq_t(), x.backend().data());
  q.canonicalize();
  return q;
}

inline mpq_class to_mpq(const BigReal& x) {
  mpq_class q;
  mpfr_get_q(q.get_mpq_t(), x.backend().data());
  q.canonicalize();
  return q;
}

inline HighReal high_pi() { return boost::math::constants::pi<HighReal>(); }

// Best rational approximation with denominator <= max_den (continued fractions).
inline mpq_class rational_reconstruct(const mpq_class& x, const mpz_class& max_den) {
  mpz_class p0 = 0, q0 = 1, p1 = 1, q1 = 0;
  mpq_class r = x;
  for (int iter = 0; iter < 400; ++iter) {
    mpz_class a;
    mpz_fdiv_q(a.get_mpz_t(), r.get_num_mpz_t(), r.get_den_mpz_t());
    mpz_class p2 = a * p1 + p0;
    mpz_class q2 = a * q1 + q0;
    if (q2 > max_den) break;
    p0 = p1; q0 = q1; p1 = p2; q1 = q2;
    mpq_class frac = r - mpq_class(a);
    if (frac == 0) break;
    r = 1 / frac;
  }
  if (q1 == 0) return mpq_class(0);
  mpq_class out(p1, q1);
  out.canonicalize();
  return out;
}

// Exact n-th root of a rational, if it is rational.
inline std::optional<mpq_class> exact_rational_root(const mpq_class& q, int n) {
  if (n <= 0) throw std::invalid_argument("root degree must be positive");
  if (q == 0) return mpq_class(0);
  bool neg = q < 0;
  if (neg && n % 2 == 0) return std::nullopt;
  mpz_class num = abs(q.get_num()), den = q.get_den();
  mpz_class rn, rd;
  if (!mpz_root(rn.get_mpz_t(), num.get_mpz_t(), static_cast<unsigned long>(n))) return std::nullopt;
  if (!mpz_root(rd.get_mpz_t(), den.get_mpz_t(), static_cast<unsigned long>(n))) return std::nullopt;
  mpq_class r(neg ? mpz_class(-rn) : rn, rd);
  r.canonicalize();
  return r;
}

// ---------------------------------------------------------------------------
// GaussianRational

class GaussianRational {
 public:
  static constexpr Backend backend = Backend::Exact;
  static constexpr bool exact = true;

  GaussianRational() = default;
  GaussianRational(long v) : re_(v), im_(0) {}  // NOLINT(google-explicit-constructor)
  GaussianRational(mpq_class re, mpq_class im) : re_(std::move(re)), im_(std::move(im)) {
    re_.canonicalize();
    im_.canonicalize();
  }
  static GaussianRational from_rational(const mpq_class& re, const mpq_class& im = 0) { return {re, im}; }
  static GaussianRational imag_unit() { return {mpq_class(0), mpq_class(1)}; }

  const mpq_class& re() const { return re_; }
  const mpq_class& im() const { return im_; }

  GaussianRational& operator+=(const GaussianRational& o) { re_ += o.re_; im_ += o.im_; return *this; }
  GaussianRational& operator-=(const GaussianRational& o) { re_ -= o.re_; im_ -= o.im_; return *this; }
  GaussianRational& operator*=(const GaussianRational& o) {
    if (o.im_ == 0) {
      re_ *= o.re_;
      im_ *= o.re_;
      return *this;
    }
    if (im_ == 0) {
      im_ = re_ * o.im_;
      re_ *= o.re_;
      return *this;
    }
    mpq_class r = re_ * o.re_ - im_ * o.im_;
    mpq_class i = re_ * o.im_ + im_ * o.re_;
    re_ = std::move(r);
    im_ = std::move(i);
    return *this;
  }
  // acc += a * b without temporaries.
  friend void add_mul(GaussianRational& acc, const GaussianRational& a, const GaussianRational& b) {
    thread_local mpq_class t;
    const bool ar = sgn(a.re_) != 0, ai = sgn(a.im_) != 0, br = sgn(b.re_) != 0, bi = sgn(b.im_) != 0;
    if (ar && br) { mpq_mul(t.get_mpq_t(), a.re_.get_mpq_t(), b.re_.get_mpq_t()); acc.re_ += t; }
    if (ai && bi) { mpq_mul(t.get_mpq_t(), a.im_.get_mpq_t(), b.im_.get_mpq_t()); acc.re_ -= t; }
    if (ar && bi) { mpq_mul(t.get_mpq_t(), a.re_.get_mpq_t(), b.im_.get_mpq_t()); acc.im_ += t; }
    if (ai && br) { mpq_mul(t.get_mpq_t(), a.im_.get_mpq_t(), b.re_.get_mpq_t()); acc.im_ += t; }
  }
  GaussianRational& operator/=(const GaussianRational& o) {
    mpq_class d = o.re_ * o.re_ + o.im_ * o.im_;
    if (d == 0) throw std::domain_error("division by zero");
    mpq_class r = (re_ * o.re_ + im_ * o.im_) / d;
    mpq_class i = (im_ * o.re_ - re_ * o.im_) / d;
    re_ = std::move(r);
    im_ = std::move(i);
    return *this;
  }
  friend GaussianRational operator+(GaussianRational a, const GaussianRational& b) { return a += b; }
  friend GaussianRational operator-(GaussianRational a, const GaussianRational& b) { return a -= b; }
  friend GaussianRational operator*(const GaussianRational& a, const GaussianRational& b) {
    GaussianRational out;
    add_mul(out, a, b);
    return out;
  }
  friend GaussianRational operator/(GaussianRational a, const GaussianRational& b) { return a /= b; }
  friend GaussianRational operator-(const GaussianRational& a) { return {mpq_class(-a.re_), mpq_class(-a.im_)}; }
  friend bool operator==(const GaussianRational& a, const GaussianRational& b) {
    return a.re_ == b.re_ && a.im_ == b.im_;
  }

  friend GaussianRational conj(const GaussianRational& a) { return {a.re_, mpq_class(-a.im_)}; }
  friend GaussianRational real_part(const GaussianRational& a) { return {a.re_, mpq_class(0)}; }
  friend GaussianRational imag_part(const GaussianRational& a) { return {a.im_, mpq_class(0)}; }
  friend GaussianRational norm2(const GaussianRational& a) {
    return {mpq_class(a.re_ * a.re_ + a.im_ * a.im_), mpq_class(0)};
  }
  friend bool is_exact_zero(const GaussianRational& a) { return a.re_ == 0 && a.im_ == 0; }
  friend bool is_zero(const GaussianRational& a) { return is_exact_zero(a); }
  friend bool near(const GaussianRational& a, const GaussianRational& b) { return a == b; }
  friend bool is_real(const GaussianRational& a) { return a.im_ == 0; }
  // Sign of the real part (callers use it on real values).
  friend int sign(const GaussianRational& a) { return sgn(a.re_); }
  friend HighReal high_re(const GaussianRational& a) { return to_high(a.re_); }
  friend HighReal high_im(const GaussianRational& a) { return to_high(a.im_); }
  // Size used for pivoting; exact backend only needs "nonzero".
  friend HighReal magnitude(const GaussianRational& a) {
    return is_exact_zero(a) ? HighReal(0) : sqrt(to_high(a.re_ * a.re_ + a.im_ * a.im_));
  }
  friend std::string str_re(const GaussianRational& a) { return a.re_.get_str(); }
  friend std::string str_im(const GaussianRational& a) { return a.im_.get_str(); }

  static mpq_class parse_component(const std::string& s);

  // Candidate reconstruction from a high-precision approximation; the result
  // must be verified by the caller.
  static GaussianRational from_high(const HighReal& re, const HighReal& im) {
    static const mpz_class max_den = mpz_class(1) << 48;
    return {rational_reconstruct(to_mpq(re), max_den), rational_reconstruct(to_mpq(im), max_den)};
  }

 private:
  mpq_class re_{0};
  mpq_class im_{0};
};

// Accepts "p" and "p/q" only; decimals are rejected to keep exact inputs bit-reproducible.
inline mpq_class GaussianRational::parse_component(const std::string& s) {
  if (s.empty()) throw InputError("empty rational string");
  if (s.find_first_of(".eE") != std::string::npos)
    throw InputError("decimal '" + s + "' not allowed on the exact backend; write it as p/q or use --backend approx");
  for (char c : s) {
    const bool ok = std::isdigit(static_cast<unsigned char>(c)) || c == '-' || c == '+' || c == '/';
    if (!ok) throw InputError("malformed rational '" + s + "'");
  }
  std::string t = s[0] == '+' ? s.substr(1) : s;
  mpq_class q;
  if (q.set_str(t, 10) != 0) throw InputError("malformed rational '" + s + "'");
  if (q.get_den() == 0) throw InputError("zero denominator in '" + s + "'");
  q.canonicalize();
  return q;
}

// ---------------------------------------------------------------------------
// BigComplex

struct ApproxSettings {
  unsigned precision_bits = 128;  // tolerance bits
  unsigned guard_bits = 64;       // working precision = precision_bits + guard_bits
};

inline ApproxSettings& approx_settings() {
  static ApproxSettings s;
  return s;
}

inline unsigned bits_to_digits10(unsigned bits) {
  return static_cast<unsigned>(std::ceil(bits * 0.30102999566398120)) + 1;
}

inline BigReal& approx_epsilon_storage() {
  static BigReal eps;
  return eps;
}

// Sets working precision to bits + guard and eps = 2^-bits. Call before
// creating BigComplex values.
inline void set_approx_precision(unsigned bits) {
  if (bits < 16) throw InputError("precision must be at least 16 bits");
  approx_settings().precision_bits = bits;
  BigReal::default_precision(bits_to_digits10(bits + approx_settings().guard_bits));
  BigReal e = 1;
  approx_epsilon_storage() = ldexp(e, -static_cast<int>(bits));
}

inline const BigReal& approx_epsilon() {
  if (approx_epsilon_storage() == 0) set_approx_precision(approx_settings().precision_bits);
  return approx_epsilon_storage();
}

inline BigReal to_big(const mpq_class& q) {
  BigReal b;
  mpfr_set_q(b.backend().data(), q.get_mpq_t(), MPFR_RNDN);
  return b;
}

inline BigReal to_big(const HighReal& h) {
  BigReal b;
  mpfr_set(b.backend().data(), h.backend().data(), MPFR_RNDN);
  return b;
}

inline HighReal to_high(const BigReal& b) {
  HighReal h;
  mpfr_set(h.backend().data(), b.backend().data(), MPFR_RNDN);
  return h;
}

class BigComplex {
 public:
  static constexpr Backend backend = Backend::Approx;
  static constexpr bool exact = false;

  BigComplex() : re_(0), im_(0) {}
  BigComplex(long v) : re_(v), im_(0) {}  // NOLINT(google-explicit-constructor)
  BigComplex(BigReal re, BigReal im) : re_(std::move(re)), im_(std::move(im)) {}
  static BigComplex from_rational(const mpq_class& re, const mpq_class& im = 0) {
    return {to_big(re), to_big(im)};
  }
  static BigComplex imag_unit() { return {BigReal(0), BigReal(1)}; }
  static BigComplex from_high(const HighReal& re, const HighReal& im) { return {to_big(re), to_big(im)}; }

  const BigReal& re() const { return re_; }
  const BigReal& im() const { return im_; }

  BigComplex& operator+=(const BigComplex& o) { re_ += o.re_; im_ += o.im_; return *this; }
  BigComplex& operator-=(const BigComplex& o) { re_ -= o.re_; im_ -= o.im_; return *this; }
  BigComplex& operator*=(const BigComplex& o) {
    BigReal r = re_ * o.re_ - im_ * o.im_;
    BigReal i = re_ * o.im_ + im_ * o.re_;
    re_ = std::move(r);
    im_ = std::move(i);
    return *this;
  }
  friend void add_mul(BigComplex& acc, const BigComplex& a, const BigComplex& b) { acc += a * b; }
  BigComplex& operator/=(const BigComplex& o) {
    BigReal d = o.re_ * o.re_ + o.im_ * o.im_;
    if (d == 0) throw std::domain_error("division by zero");
    BigReal r = (re_ * o.re_ + im_ * o.im_) / d;
    BigReal i = (im_ * o.re_ - re_ * o.im_) / d;
    re_ = std::move(r);
    im_ = std::move(i);
    return *this;
  }
  friend BigComplex operator+(BigComplex a, const BigComplex& b) { return a += b; }
  friend BigComplex operator-(BigComplex a, const BigComplex& b) { return a -= b; }
  friend BigComplex operator*(BigComplex a, const BigComplex& b) { return a *= b; }
  friend BigComplex operator/(BigComplex a, const BigComplex& b) { return a /= b; }
  friend BigComplex operator-(const BigComplex& a) { return {BigReal(-a.re_), BigReal(-a.im_)}; }

  friend BigComplex conj(const BigComplex& a) { return {a.re_, BigReal(-a.im_)}; }
  friend BigComplex real_part(const BigComplex& a) { return {a.re_, BigReal(0)}; }
  friend BigComplex imag_part(const BigComplex& a) { return {a.im_, BigReal(0)}; }
  friend BigComplex norm2(const BigComplex& a) { return {BigReal(a.re_ * a.re_ + a.im_ * a.im_), BigReal(0)}; }
  friend BigReal abs_big(const BigComplex& a) { return sqrt(a.re_ * a.re_ + a.im_ * a.im_); }
  friend bool is_exact_zero(const BigComplex& a) { return a.re_ == 0 && a.im_ == 0; }
  friend bool is_zero(const BigComplex& a) { return abs_big(a) <= approx_epsilon(); }
  friend bool near(const BigComplex& a, const BigComplex& b) {
    BigReal scale = 1;
    BigReal ma = abs_big(a), mb = abs_big(b);
    if (ma > scale) scale = ma;
    if (mb > scale) scale = mb;
    return abs_big(a - b) <= approx_epsilon() * scale;
  }
  friend bool is_real(const BigComplex& a) {
    BigReal scale = abs_big(a);
    if (scale < 1) scale = 1;
    return abs(a.im_) <= approx_epsilon() * scale;
  }
  friend int sign(const BigComplex& a) {
    if (abs(a.re_) <= approx_epsilon()) return 0;
    return a.re_ > 0 ? 1 : -1;
  }
  friend HighReal high_re(const BigComplex& a) { return to_high(a.re_); }
  friend HighReal high_im(const BigComplex& a) { return to_high(a.im_); }
  friend HighReal magnitude(const BigComplex& a) { return to_high(abs_big(a)); }
  friend std::string str_re(const BigComplex& a) { return fmt(a.re_); }
  friend std::string str_im(const BigComplex& a) { return fmt(a.im_); }

  static BigReal parse_component(const std::string& s);

 private:
  static std::string fmt(const BigReal& x) {
    if (x == 0) return "0";
    // Enough digits for the working precision; deterministic for fixed input.
    return x.str(static_cast<std::streamsize>(bits_to_digits10(approx_settings().precision_bits)),
                 std::ios_base::scientific);
  }
  BigReal re_;
  BigReal im_;
};

inline BigReal BigComplex::parse_component(const std::string& s) {
  if (s.empty()) throw InputError("empty numeric string");
  auto slash = s.find('/');
  if (slash != std::string::npos) return to_big(GaussianRational::parse_component(s));
  for (char c : s) {
    if (!(std::isdigit(static_cast<unsigned char>(c)) || c == '.' || c == '-' || c == '+' || c == 'e' ||
          c == 'E'))
      throw InputError("malformed decimal '" + s + "'");
  }
  try {
    return BigReal(s);
  } catch (const std::exception&) {
    throw InputError("malformed decimal '" + s + "'");
  }
}

// ---------------------------------------------------------------------------
// Backend-generic interface.

template <class S>
concept Scalar = requires(S a, const S& b, long n) {
  { a + b } -> std::same_as<S>;
  { a - b } -> std::same_as<S>;
  { a * b } -> std::same_as<S>;
  { a / b } -> std::same_as<S>;
  { -a } -> std::same_as<S>;
  { conj(b) } -> std::same_as<S>;
  { real_part(b) } -> std::same_as<S>;
  { imag_part(b) } -> std::same_as<S>;
  { norm2(b) } -> std::same_as<S>;
  { is_zero(b) } -> std::same_as<bool>;
  { is_exact_zero(b) } -> std::same_as<bool>;
  { near(b, b) } -> std::same_as<bool>;
  { is_real(b) } -> std::same_as<bool>;
  { S::imag_unit() } -> std::same_as<S>;
  { S(n) };
  S::exact;
};

template <Scalar S>
S imag_unit() {
  return S::imag_unit();
}

template <Scalar S>
S rational(long num, long den = 1) {
  return S::from_rational(mpq_class(num, den));
}

template <Scalar S>
S power(S base, int e) {
  if (e < 0) {
    base = S(1) / base;
    e = -e;
  }
  S out(1);
  while (e > 0) {
    if (e & 1) out *= base;
    base *= base;
    e >>= 1;
  }
  return out;
}

// Real n-th root of a real value. Exact backend: nullopt when irrational.
// For even n the nonnegative root is returned.
inline std::optional<GaussianRational> real_root(const GaussianRational& x, int n) {
  if (!is_real(x)) throw std::invalid_argument("real_root of non-real value");
  auto r = exact_rational_root(x.re(), n);
  if (!r) return std::nullopt;
  return GaussianRational(*r, mpq_class(0));
}

inline std::optional<BigComplex> real_root(const BigComplex& x, int n) {
  BigReal v = x.re();
  if (v < 0 && n % 2 == 0) return std::nullopt;
  bool neg = v < 0;
  BigReal r = pow(abs(v), BigReal(1) / BigReal(n));
  return BigComplex(neg ? BigReal(-r) : r, BigReal(0));
}

// Argument in [0, 2*pi), high precision.
template <Scalar S>
HighReal argument(const S& x) {
  HighReal a = atan2(high_im(x), high_re(x));
  if (a < 0) a += 2 * high_pi();
  return a;
}

// All n-th roots of c. For the exact backend only roots that are Gaussian
// rationals are returned (found by reconstruction and verified exactly);
// `complete` reports whether all n were found.
template <Scalar S>
std::vector<S> complex_roots(const S& c, int n, bool* complete = nullptr) {
  std::vector<S> out;
  if (n <= 0) throw std::invalid_argument("root degree must be positive");
  HighReal mod = pow(sqrt(high_re(c) * high_re(c) + high_im(c) * high_im(c)), HighReal(1) / HighReal(n));
  HighReal base = atan2(high_im(c), high_re(c));
  for (int t = 0; t < n; ++t) {
    HighReal ang = (base + 2 * high_pi() * t) / n;
    S cand = S::from_high(mod * cos(ang), mod * sin(ang));
    if constexpr (S::exact) {
      if (power(cand, n) == c) out.push_back(cand);
    } else {
      out.push_back(cand);
    }
  }
  if (complete) *complete = static_cast<int>(out.size()) == n;
  return out;
}

// Unit-modulus L-th root of unity exp(2 pi i rho / L). Exact backend only
// supports the Gaussian-rational ones (L dividing 4 after reduction).
template <Scalar S>
std::optional<S> root_of_unity(int rho, int L) {
  if (L <= 0) throw std::invalid_argument("root_of_unity: L must be positive");
  rho = ((rho % L) + L) % L;
  if constexpr (S::exact) {
    // Reduce rho/L.
    int g = std::gcd(rho, L);
    int r = rho / g, d = L / g;
    if (d == 1) return S(1);
    if (d == 2) return S(-1);
    if (d == 4) return r == 1 ? S::imag_unit() : -S::imag_unit();
    return std::nullopt;
  } else {
    HighReal ang = 2 * high_pi() * rho / L;
    return S::from_high(cos(ang), sin(ang));
  }
}

template <Scalar S>
std::string to_display(const S& x) {
  std::string r = str_re(x), i = str_im(x);
  if (i == "0") return r;
  return "(" + r + ")+(" + i + ")i";
}

}  // namespace crnf
