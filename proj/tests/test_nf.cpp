#include <gtest/gtest.h>

#include "crnf/generate.hpp"
#include "crnf/nf.hpp"
#include "helpers.hpp"
#include "oracle.hpp"

using namespace crnf;
using namespace testing_helpers;

namespace {

std::vector<ModelPolynomial<Q>> sample_models(Rng& rng) {
  std::vector<ModelPolynomial<Q>> out;
  for (int k = 3; k <= 8; ++k) out.push_back(tube_model<Q>(k));
  for (int k : {4, 6, 8}) out.push_back(circular_model<Q>(k));
  for (int k = 4; k <= 8; ++k)
    for (int r = 0; r < 3; ++r) out.push_back(random_normalized_model<Q>(ModelClass::Generic, k, rng));
  return out;
}

NormalizeOptions fast_opts(bool cross = true) {
  NormalizeOptions o;
  o.cross_check = cross;
  return o;
}

}  // namespace

TEST(Conditions, SquareAndNonsingularForEveryClass) {
  Rng rng(11);
  for (const auto& M : sample_models(rng)) {
    const int W = 3 * M.k;
    SurfaceSeries<Q> F = SurfaceSeries<Q>::from_poly(M.poly(W));
    for (int mu = M.k + 1; mu <= W; ++mu) {
      const auto rows = conditions_at(M, mu);
      const auto cols = detail::unknowns_at(M, mu);
      ASSERT_EQ(rows.size(), cols.size()) << class_name(M.cls) << " k=" << M.k << " mu=" << mu;
      auto sol = solve_weight(F, M, mu);
      EXPECT_TRUE(sol.report.square);
      EXPECT_TRUE(sol.report.nonsingular);
      EXPECT_TRUE(sol.report.residual_ok);
      EXPECT_TRUE(sol.report.f.empty());
      EXPECT_TRUE(sol.report.g.empty());
    }
  }
}

TEST(CheckNormalForm, ModelPasses) {
  for (int k = 3; k <= 6; ++k) {
    auto M = tube_model<Q>(k);
    auto F = SurfaceSeries<Q>::from_poly(M.poly(2 * k + 2));
    auto chk = check_normal_form(F, M);
    EXPECT_TRUE(chk.pass);
    EXPECT_TRUE(chk.model_matches);
    EXPECT_GT(chk.rows_checked, 0);
  }
}

TEST(CheckNormalForm, PureZTermFails) {
  auto M = circular_model<Q>(4);
  auto F = SurfaceSeries<Q>::from_poly(M.poly(10));
  F.set(5, 0, 0, q(1));
  auto chk = check_normal_form(F, M);
  EXPECT_FALSE(chk.pass);
  ASSERT_FALSE(chk.failures.empty());
  EXPECT_EQ(chk.failures.front().weight, 5);
}

TEST(CheckNormalForm, WrongModelFails) {
  auto M = tube_model<Q>(4);
  auto F = SurfaceSeries<Q>::from_poly(circular_model<Q>(4).poly(8));
  auto chk = check_normal_form(F, M);
  EXPECT_FALSE(chk.pass);
  EXPECT_FALSE(chk.model_matches);
}

TEST(LinearOperator, LinearTermOfF) {
  // P = z zbar^3 + z^3 zbar, f = c z: Re(2 P_z c z) has (3c + conj c) at z^3 zbar.
  auto M = model_from_coefficients<Q>(4, {q(0), q(1), q(0), q(1), q(0)});
  const Grading g{4};
  const Q c = Q::from_rational(2, 5);
  HoloSeries<Q> f(g, 1), gg(g, 4);
  f.add(1, 0, c);
  auto Lp = linear_operator_L(f, gg, M, 4);
  EXPECT_EQ(Lp.coeff(3, 1, 0), c * q(3) + conj(c));
  EXPECT_EQ(Lp.coeff(1, 3, 0), conj(c) * q(3) + c);
}

TEST(LinearOperator, GTermIsImaginaryPart) {
  // g = c z^5 on the circular model k = 4: L = Re(i c z^5) = -Im(c z^5).
  auto M = circular_model<Q>(4);
  const Grading g{4};
  HoloSeries<Q> f(g, 2), gg(g, 5);
  gg.add(5, 0, qi(-2));
  auto Lp = linear_operator_L(f, gg, M, 5);
  EXPECT_EQ(Lp.coeff(5, 0, 0), q(1));
  EXPECT_EQ(Lp.coeff(0, 5, 0), q(1));
  EXPECT_EQ(Lp.size(), 2u);
}

TEST(LinearOperator, RejectsWrongSliceWeight) {
  auto M = circular_model<Q>(4);
  const Grading g{4};
  HoloSeries<Q> f(g, 3), gg(g, 5);
  f.add(3, 0, q(1));
  EXPECT_THROW(linear_operator_L(f, gg, M, 5), InputError);
}

TEST(SolveWeight, CircularPureTerms) {
  auto M = circular_model<Q>(4);
  auto F = surface<Q>(Grading{4}, 8, {{2, 2, 0, q(1)}, {5, 0, 0, q(1)}});
  auto sol = solve_weight(F, M, 5, true);
  EXPECT_TRUE(sol.report.f.empty());
  EXPECT_EQ(sol.report.g.coeff(5, 0), qi(-2));
  EXPECT_EQ(sol.report.g.terms().size(), 1u);
  EXPECT_TRUE(sol.Fstar.empty());
  EXPECT_TRUE(sol.report.cross_ok());
}

TEST(SolveWeight, RejectsWeightAtOrBelowK) {
  auto M = tube_model<Q>(3);
  auto F = SurfaceSeries<Q>::from_poly(M.poly(6));
  EXPECT_THROW(solve_weight(F, M, 3), InputError);
}

TEST(Normalize, CircularWorkedExample) {
  auto F = surface<Q>(Grading{0}, 8, {{2, 2, 0, q(1)}, {5, 0, 0, q(1)}});
  auto R = normalize(F, 8, fast_opts());
  EXPECT_EQ(R.k, 4);
  EXPECT_EQ(R.model.cls, ModelClass::Circular);
  EXPECT_EQ(R.nf.half().size(), 1u);
  EXPECT_EQ(R.nf.coeff(2, 2, 0), q(1));
  EXPECT_TRUE(R.T.f().empty());
  EXPECT_EQ(R.T.g().terms().size(), 1u);
  EXPECT_EQ(R.T.g().coeff(5, 0), qi(-2));
  EXPECT_TRUE(R.cross_ok());
  EXPECT_TRUE(oracle::identity_holds(R.partial, R.nf, R.T, R.W));
}

TEST(Normalize, OracleIdentityOnRandomInputs) {
  Rng rng(21);
  struct Case {
    ModelClass cls;
    int k;
  };
  const Case cases[] = {{ModelClass::Tube, 3}, {ModelClass::Tube, 5}, {ModelClass::Generic, 4},
                        {ModelClass::Generic, 5}, {ModelClass::Circular, 4}, {ModelClass::Circular, 6}};
  for (const auto& c : cases)
    for (int r = 0; r < 3; ++r) {
      auto M = random_normalized_model<Q>(c.cls, c.k, rng);
      const int W = 2 * c.k + 4;
      auto F = random_surface<Q>(M, W, rng);
      auto R = normalize(F, W, fast_opts());
      std::string why;
      EXPECT_TRUE(R.check.pass);
      EXPECT_TRUE(R.round_trip_ok);
      EXPECT_TRUE(R.cross_ok()) << class_name(c.cls) << " k=" << c.k;
      EXPECT_TRUE(oracle::identity_holds(R.partial, R.nf, R.T, W, &why)) << why;
      for (const auto& rep : R.reports) EXPECT_TRUE(rep.square && rep.nonsingular && rep.residual_ok);
    }
}

TEST(Normalize, Idempotent) {
  Rng rng(5);
  for (auto cls : {ModelClass::Tube, ModelClass::Generic, ModelClass::Circular}) {
    auto M = random_normalized_model<Q>(cls, 4, rng);
    auto F = random_surface<Q>(M, 10, rng);
    auto R1 = normalize(F, 10);
    auto R2 = normalize(R1.nf, 10);
    EXPECT_TRUE(R2.T.is_identity());
    EXPECT_TRUE(R2.nf.near_equal(R1.nf));
  }
}

TEST(Normalize, UniquenessRoundTrip) {
  Rng rng(8);
  for (auto cls : {ModelClass::Tube, ModelClass::Generic, ModelClass::Circular})
    for (int r = 0; r < 2; ++r) {
      const int k = cls == ModelClass::Tube ? 3 + r : 4 + 2 * r;
      const int W = 2 * k + 2;
      auto M = random_normalized_model<Q>(cls, k, rng);
      auto N = normalize(random_surface<Q>(M, W, rng), W).nf;
      // Circular: the Re g_ww = 0 condition is not inverse-closed, so T0 is
      // drawn as the inverse of a normalized map.
      auto S0 = random_normalized_map<Q>(Grading{k}, W, rng, cls == ModelClass::Circular);
      auto T0 = cls == ModelClass::Circular ? inverse(S0) : S0;
      auto G = apply_map(N, T0, W);
      auto R = normalize(G, W);
      EXPECT_TRUE(R.nf.near_equal(N)) << class_name(cls) << " k=" << k;
      EXPECT_TRUE(R.T.near_equal(inverse(T0)));
    }
}

TEST(Normalize, RawInputMatchesWeightedPipeline) {
  // Raw input with a cubic harmonic term: the prefix records alpha_3.
  auto F = surface<Q>(Grading{0}, 9, {{2, 1, 0, q(1)}, {3, 0, 0, q(1)}, {2, 2, 0, q(1, 2)}});
  auto R = normalize(F, 9, fast_opts());
  EXPECT_TRUE(R.raw_input);
  EXPECT_EQ(R.k, 3);
  EXPECT_EQ(R.model.cls, ModelClass::Tube);
  ASSERT_GE(R.prefix.alpha.size(), 4u);
  EXPECT_EQ(R.prefix.alpha[3], qi(-2));
  EXPECT_TRUE(R.check.pass);
  EXPECT_TRUE(oracle::identity_holds(R.partial, R.nf, R.T, R.W));
  ASSERT_TRUE(R.tube_C.has_value());
  EXPECT_EQ(*R.tube_C, 3);
}

TEST(Normalize, ErrorPropagation) {
  // Irrational beta on the exact backend.
  auto F = model_series<Q>(Grading{4}, 8, 4, {q(0), q(2), q(0), q(2), q(0)});
  EXPECT_THROW(normalize(F, 8), NeedsApproxBackend);
  // Truncation below the type.
  auto G = surface<Q>(Grading{0}, 3, {{2, 2, 0, q(1)}});
  EXPECT_THROW(normalize(G, 3), InputError);
  // Weighted input carrying a weight-k harmonic term.
  auto H = surface<Q>(Grading{4}, 8, {{2, 2, 0, q(1)}, {4, 0, 0, q(1)}});
  EXPECT_THROW(normalize(H, 8), InputError);
}

TEST(Normalize, ApproxIrrationalBetaPipeline) {
  set_approx_precision(128);
  Rng rng(3);
  std::vector<A> a(5, A(0));
  a[1] = a[3] = A(2);
  auto F = model_series<A>(Grading{4}, 10, 4, a);
  auto tail = random_tail<A>(Grading{4}, 5, 10, rng);
  for (const auto& [key, c] : tail.half()) F.set(key.i, key.j, key.m, c);
  auto R = normalize(F, 10, fast_opts());
  EXPECT_EQ(R.model.cls, ModelClass::Generic);
  EXPECT_TRUE(R.check.pass);
  EXPECT_TRUE(R.cross_ok());
  EXPECT_TRUE(R.round_trip_ok);
  std::string why;
  EXPECT_TRUE(oracle::identity_holds(R.partial, R.nf, R.T, R.W, &why)) << why;
}

TEST(ModelInvariants, CauchySchwarzStrictForGeneric) {
  Rng rng(13);
  for (int k = 4; k <= 9; ++k)
    for (int r = 0; r < 5; ++r) {
      auto M = random_normalized_model<Q>(ModelClass::Generic, k, rng);
      const Q zz = scalar_product(M.pz(), M.pz());
      const Q zb = scalar_product(M.pz(), M.pzbar());
      EXPECT_LT(norm2(zb).re(), (zz * zz).re()) << "k=" << k;
    }
  for (int k = 3; k <= 8; ++k) {
    auto M = tube_model<Q>(k);
    const Q zz = scalar_product(M.pz(), M.pz());
    const Q zb = scalar_product(M.pz(), M.pzbar());
    EXPECT_EQ(norm2(zb), zz * zz);
  }
}

TEST(ModelInvariants, TubeConstantAtLeastThree) {
  EXPECT_EQ(tube_constant(3), 3);
  EXPECT_EQ(tube_constant(4), mpq_class(17, 2));
  for (int k = 3; k <= 12; ++k) EXPECT_GE(tube_constant(k), 3) << k;
}
