#include <gtest/gtest.h>

#include <random>

#include "crnf/generate.hpp"
#include "crnf/model.hpp"
#include "helpers.hpp"
#include "oracle.hpp"

using namespace crnf;
using namespace testing_helpers;

namespace {

const Grading g0{0};

std::vector<Q> coeffs(int k, std::initializer_list<std::pair<int, Q>> nz) {
  std::vector<Q> a(k + 1, Q(0));
  for (auto& [j, c] : nz) {
    a[j] = c;
    a[k - j] = conj(c);
  }
  return a;
}

}  // namespace

TEST(RemoveHarmonics, AlreadyHarmonicFree) {
  auto F = surface<Q>(g0, 6, {{2, 1, 0, q(1)}});
  auto H = remove_harmonics(F);
  EXPECT_EQ(H.k, 3);
  for (const auto& a : H.alpha) EXPECT_TRUE(is_exact_zero(a));
  EXPECT_TRUE(H.series.near_equal(F));
}

TEST(RemoveHarmonics, CubicHarmonic) {
  auto F = surface<Q>(g0, 7, {{3, 0, 0, q(1)}, {2, 2, 0, q(1)}});
  auto H = remove_harmonics(F);
  EXPECT_EQ(H.k, 4);
  EXPECT_EQ(H.alpha[3], qi(-2));
  EXPECT_EQ(H.series.truncated(4).half().size(), 1u);
  EXPECT_EQ(H.series.coeff(2, 2, 0), q(1));
  EXPECT_TRUE(oracle::identity_holds(F, H.series, harmonic_map(g0, 7, H.alpha), 7));
}

TEST(RemoveHarmonics, QuadraticHarmonic) {
  auto F = surface<Q>(g0, 6, {{2, 0, 0, q(1)}, {3, 1, 0, q(1)}});
  auto H = remove_harmonics(F);
  EXPECT_EQ(H.k, 4);
  EXPECT_EQ(H.alpha[2], qi(-2));
  EXPECT_EQ(H.series.coeff(3, 1, 0), q(1));
  EXPECT_TRUE(is_exact_zero(H.series.coeff(2, 0, 0)));
  EXPECT_TRUE(oracle::identity_holds(F, H.series, harmonic_map(g0, 6, H.alpha), 6));
}

TEST(RemoveHarmonics, IdempotentOnRandomInputs) {
  Rng rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    SurfaceSeries<Q> F = random_tail<Q>(g0, 4, 6, rng, 0.4);
    for (int j = 0; j <= 3; ++j) F.set(j, 0, 0, Q(0));
    F.set(2, 0, 0, random_scalar<Q>(rng));
    F.set(3, 0, 0, random_scalar<Q>(rng));
    F.set(2, 2, 0, q(1));
    F.set(1, 1, 0, Q(0));
    F.set(2, 1, 0, Q(0));
    auto H = remove_harmonics(F);
    ASSERT_EQ(H.k, 4);
    auto H2 = remove_harmonics(H.series);
    for (const auto& a : H2.alpha) EXPECT_TRUE(is_exact_zero(a));
    EXPECT_TRUE(oracle::identity_holds(F, H.series, harmonic_map(g0, 6, H.alpha), 6));
  }
}

TEST(RemoveHarmonics, Verdicts) {
  EXPECT_THROW(remove_harmonics(surface<Q>(g0, 5, {{1, 1, 0, q(1)}})), LeviNondegenerate);
  EXPECT_THROW(remove_harmonics(surface<Q>(g0, 5, {{3, 0, 0, q(1)}, {1, 1, 2, q(1)}})), TypeExceedsBound);
  EXPECT_THROW(remove_harmonics(surface<Q>(Grading{4}, 8, {{2, 2, 0, q(1)}})), InputError);
}

TEST(ExtractModel, IndexData) {
  auto M = model_from_coefficients<Q>(4, coeffs(4, {{1, q(1)}}));
  EXPECT_EQ(M.l, 1);
  EXPECT_EQ(M.m, std::vector<int>({1}));
  EXPECT_EQ(M.mprime, std::vector<int>({2}));
  EXPECT_EQ(M.L, 2);
  EXPECT_TRUE(M.q.empty());

  auto C = model_from_coefficients<Q>(4, coeffs(4, {{2, q(1)}}));
  EXPECT_EQ(C.l, 2);
  EXPECT_TRUE(C.m.empty());
  EXPECT_EQ(C.cls, ModelClass::Circular);

  auto M6 = model_from_coefficients<Q>(6, coeffs(6, {{1, q(1)}, {2, q(1)}}));
  EXPECT_EQ(M6.l, 1);
  EXPECT_EQ(M6.m, std::vector<int>({1, 2}));
  EXPECT_EQ(M6.mprime, std::vector<int>({4, 2}));
  EXPECT_EQ(M6.L, 2);
  EXPECT_EQ(M6.q, std::vector<int>({2}));
  int prod = M6.L;
  for (int x : M6.q) prod *= x;
  EXPECT_EQ(prod, 6 - 2 * M6.l);
}

TEST(ExtractModel, FromSeries) {
  auto F = surface<Q>(Grading{4}, 8, {{3, 1, 0, q(2)}, {4, 1, 0, q(5)}});
  auto M = extract_model(F);
  EXPECT_EQ(M.k, 4);
  EXPECT_EQ(M.a[1], q(2));
  EXPECT_EQ(M.a[3], q(2));
  EXPECT_THROW(extract_model(surface<Q>(Grading{4}, 8, {{4, 1, 0, q(5)}})), InvariantViolation);
}

TEST(ScalarProduct, Values) {
  auto M = model_from_coefficients<Q>(4, coeffs(4, {{1, q(1)}}));
  // P_z = zbar^3 + 3 z^2 zbar; the harmonic zbar^3 is dropped.
  EXPECT_EQ(scalar_product(M.pz(), M.pz()), q(9));
  EXPECT_THROW(scalar_product(std::vector<Q>(3), std::vector<Q>(4)), InputError);
  auto T = tube_model<Q>(4);
  EXPECT_EQ(norm2(scalar_product(T.pz(), T.pzbar())), scalar_product(T.pz(), T.pz()) * scalar_product(T.pz(), T.pz()));
  // Strict inequality for the generic example.
  EXPECT_NE(norm2(scalar_product(M.pz(), M.pzbar())), q(81));
  // Poly3 form.
  Poly3<Q> x(Grading{0}, 5), y(Grading{0}, 5);
  x.add(2, 1, 0, q(3));
  x.add(3, 0, 0, q(7));
  y.add(2, 1, 0, qi(1));
  EXPECT_EQ(scalar_product(x, y), qi(-3));
}

TEST(Classify, TubeModels) {
  for (int k = 3; k <= 8; ++k) {
    auto T = tube_model<Q>(k);
    EXPECT_EQ(T.cls, ModelClass::Tube) << k;
    EXPECT_EQ(T.a[1], q(1)) << k;
    auto A5 = tube_model<A>(k);
    EXPECT_EQ(A5.cls, ModelClass::Tube) << k;
  }
  EXPECT_EQ(model_from_coefficients<Q>(3, coeffs(3, {{1, q(1)}})).cls, ModelClass::Tube);
}

TEST(Classify, CircularAndGeneric) {
  for (int k : {4, 6, 8}) EXPECT_EQ(circular_model<Q>(k).cls, ModelClass::Circular);
  EXPECT_EQ(model_from_coefficients<Q>(4, coeffs(4, {{1, q(1)}})).cls, ModelClass::Generic);
}

TEST(Classify, TubeInvariantUnderRescaling) {
  Rng rng(5);
  for (int k = 3; k <= 7; ++k) {
    auto T = tube_model<Q>(k);
    for (int t = 0; t < 4; ++t) {
      Q beta = random_scalar<Q>(rng);
      if (is_zero(beta)) beta = q(1);
      std::vector<Q> a(k + 1, Q(0));
      for (int j = 1; j < k; ++j) a[j] = T.a[j] * power(beta * conj(beta), j) * power(conj(beta), k - 2 * j);
      EXPECT_EQ(model_from_coefficients<Q>(k, a).cls, ModelClass::Tube) << k;
    }
  }
}

TEST(NormalizeModel, AlreadyNormalized) {
  auto F = model_series<Q>(Grading{4}, 8, 4, coeffs(4, {{1, q(1)}}));
  auto N = normalize_model(F, extract_model(F));
  EXPECT_EQ(N.beta, q(1));
  EXPECT_FALSE(N.sign_flip);
  EXPECT_EQ(N.admissible, 2);
  EXPECT_TRUE(N.series.near_equal(F));

  auto T = model_series<Q>(Grading{5}, 10, 5, tube_model<Q>(5).a);
  auto NT = normalize_model(T, extract_model(T));
  EXPECT_EQ(NT.beta, q(1));
}

TEST(NormalizeModel, IrrationalBetaNeedsApprox) {
  auto F = model_series<Q>(Grading{4}, 8, 4, coeffs(4, {{1, q(2)}}));
  EXPECT_THROW(normalize_model(F, extract_model(F)), NeedsApproxBackend);
}

TEST(NormalizeModel, ApproxFourthRoot) {
  set_approx_precision(128);
  std::vector<A> a(5, A(0));
  a[1] = a[3] = A(2);
  auto F = model_series<A>(Grading{4}, 8, 4, a);
  auto N = normalize_model(F, extract_model(F));
  HighReal want = pow(HighReal(2), HighReal(-0.25));
  EXPECT_LE(abs(high_re(N.beta) - want) / want, pow(HighReal(2), -100));
  EXPECT_LE(abs(high_im(N.beta)), pow(HighReal(2), -100));
  EXPECT_TRUE(near(N.model.a[1], A(1)));
  EXPECT_TRUE(near(N.model.a[3], A(1)));
  EXPECT_EQ(N.admissible, 2);
}

TEST(NormalizeModel, AllAdmissibleBetasGiveSameModel) {
  set_approx_precision(128);
  // k = 6, m = (1, 2): L = 2 so beta and -beta are both admissible.
  std::vector<A> a(7, A(0));
  a[1] = A::from_rational(2, 1);
  a[5] = conj(a[1]);
  a[2] = A::from_rational(1, -3);
  a[4] = conj(a[2]);
  auto F = model_series<A>(Grading{6}, 12, 6, a);
  auto N = normalize_model(F, extract_model(F));
  EXPECT_EQ(N.admissible, N.model.L);
  auto other = rescale_series(F, -N.beta, false);
  EXPECT_TRUE(extract_model(other).poly(6).near_equal(N.model.poly(6)));
  EXPECT_TRUE(near(N.model.a[1], A(1)));
  // Sector condition for a_2: argument in [0, 2 pi / q_0).
  HighReal arg2 = argument(N.model.a[2]);
  EXPECT_LT(arg2, high_pi());
}

TEST(NormalizeModel, SignFlips) {
  auto C = model_series<Q>(Grading{4}, 8, 4, coeffs(4, {{2, q(-1, 16)}}));
  C.set(2, 2, 1, q(1));
  auto N = normalize_model(C, extract_model(C));
  EXPECT_TRUE(N.sign_flip);
  EXPECT_EQ(N.model.a[2], q(1));
  EXPECT_EQ(N.model.cls, ModelClass::Circular);

  std::vector<Q> t = tube_model<Q>(4).a;
  for (auto& x : t) x = -x;
  auto T = model_series<Q>(Grading{4}, 8, 4, t);
  auto NT = normalize_model(T, extract_model(T));
  EXPECT_TRUE(NT.sign_flip);
  EXPECT_TRUE(NT.model.poly(4).near_equal(tube_model<Q>(4).poly(4)));
}

TEST(PrefixMaps, RoundTripThroughDegreeMap) {
  // Raw input with a harmonic cubic and a non-normalized quartic model.
  const int D = 8;
  auto F = surface<Q>(g0, D, {{3, 0, 0, qi(1)}, {3, 1, 0, q(16)}, {2, 2, 0, q(-2)}, {4, 1, 1, q(1)}});
  auto H = remove_harmonics(F);
  ASSERT_EQ(H.k, 4);
  auto G = H.series.regraded(Grading{4}, D);
  auto N = normalize_model(G, extract_model(G));
  PrefixMaps<Q> pre{H.alpha, N.beta, N.sign_flip};
  auto direct = apply_map(F, pre.degree_map(D), D).regraded(Grading{4}, D);
  EXPECT_TRUE(direct.near_equal(N.series));
}
