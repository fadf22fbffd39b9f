#include <gtest/gtest.h>

#include "crnf/generate.hpp"
#include "crnf/sym.hpp"
#include "helpers.hpp"

using namespace crnf;
using namespace testing_helpers;

namespace {

ModelPolynomial<Q> k4_generic() { return model_from_coefficients<Q>(4, {q(0), q(1), q(0), q(1), q(0)}); }

SurfaceSeries<Q> random_nf(const ModelPolynomial<Q>& M, int W, Rng& rng) {
  return normalize(random_surface<Q>(M, W, rng), W).nf;
}

}  // namespace

TEST(SymmetryElement, GenericTubeGroupLaws) {
  auto M = k4_generic();
  auto h1 = generic_tube_element(M, q(2), 1);
  auto h2 = generic_tube_element(M, q(1, 3), 1);
  auto c = compose(h1, h2);
  EXPECT_EQ(c.delta, q(2, 3));
  EXPECT_EQ(c.rho, 0);
  EXPECT_EQ(c.phase, q(1));
  EXPECT_TRUE(compose(h1, inverse(h1)).is_identity());
  EXPECT_TRUE(compose(to_map(h1, 8), to_map(h2, 8)).near_equal(to_map(c, 8)));
}

TEST(SymmetryElement, CircularGroupLaws) {
  const int k = 4, W = 12;
  auto h1 = circular_element<Q>(k, q(2), qi(1), q(1, 3));
  auto h2 = circular_element<Q>(k, q(1, 2), q(-1), q(-2));
  auto c = compose(h1, h2);
  EXPECT_EQ(c.mu, q(-2) + q(1, 3) * q(1, 16));
  EXPECT_TRUE(compose(to_map(h1, W), to_map(h2, W)).near_equal(to_map(c, W)));
  EXPECT_TRUE(compose(h2, inverse(h2)).is_identity());
  EXPECT_TRUE(compose(inverse(h1), h1).is_identity());
}

TEST(SymmetryElement, Validation) {
  auto M = k4_generic();
  EXPECT_THROW(generic_tube_element(M, q(-1), 0), InputError);
  EXPECT_THROW(circular_element<Q>(4, q(1), q(2), q(0)), InputError);
  EXPECT_THROW(circular_element<Q>(5, q(1), q(1), q(0)), InputError);
  // k = 7 with a_2 only below k/2: L = 3, whose roots of unity are not Gaussian rationals.
  std::vector<Q> a(8, q(0));
  a[2] = a[5] = q(1);
  auto M7 = model_from_coefficients<Q>(7, a);
  ASSERT_EQ(M7.L, 3);
  EXPECT_NO_THROW(generic_tube_element(M7, q(2), 0));
  EXPECT_THROW(generic_tube_element(M7, q(2), 1), NeedsApproxBackend);
}

TEST(Act, IdentityAndRootOfUnity) {
  auto M = k4_generic();
  auto P = SurfaceSeries<Q>::from_poly(M.poly(10));
  EXPECT_TRUE(act(P, identity_element(M), 10).near_equal(P));
  EXPECT_TRUE(act(P, generic_tube_element(M, q(1), 1), 10).near_equal(P));
}

TEST(Act, ClassMismatchThrows) {
  auto P = SurfaceSeries<Q>::from_poly(k4_generic().poly(8));
  EXPECT_THROW(act(P, circular_element<Q>(4, q(1), q(1), q(0)), 8), InputError);
}

TEST(Act, ClosureAndActionLaw) {
  Rng rng(4);
  // GenericTube.
  {
    auto M = k4_generic();
    auto N = random_nf(M, 10, rng);
    auto h1 = generic_tube_element(M, q(2), 1), h2 = generic_tube_element(M, q(3, 2), 0);
    auto A1 = act(N, h1, 10);
    EXPECT_TRUE(check_normal_form(A1, M, 10).pass);
    EXPECT_TRUE(act(A1, h2, 10).near_equal(act(N, compose(h2, h1), 10)));
  }
  // Circular with the mu-family.
  {
    auto M = circular_model<Q>(4);
    auto N = random_nf(M, 12, rng);
    auto h1 = circular_element<Q>(4, q(2), qi(1), q(1, 2));
    auto h2 = circular_element<Q>(4, q(1), q(-1), q(-3));
    auto A1 = act(N, h1, 12);
    EXPECT_TRUE(check_normal_form(A1, M, 12).pass);
    EXPECT_TRUE(act(A1, h2, 12).near_equal(act(N, compose(h2, h1), 12)));
  }
}

TEST(Act, DiagonalRelationOnLowSector) {
  Rng rng(9);
  auto M = k4_generic();
  auto N = random_nf(M, 12, rng);
  for (int rho = 0; rho < 2; ++rho) {
    auto h = generic_tube_element(M, q(2), rho);
    auto B = act(N, h, 12);
    std::string why;
    EXPECT_TRUE(diagonal_relation_holds(N, B, h, 12, &why)) << why;
    EXPECT_FALSE(diagonal_relation_holds(N, B, generic_tube_element(M, q(3), rho), 12));
  }
}

TEST(Equivalence, Reflexive) {
  Rng rng(1);
  auto M = k4_generic();
  auto N = random_nf(M, 10, rng);
  auto v = equivalence(N, N, 10);
  EXPECT_EQ(v.outcome, Outcome::Equivalent);
  ASSERT_TRUE(v.witness);
  EXPECT_TRUE(v.witness->is_identity());
}

TEST(Equivalence, DilationWitness) {
  Rng rng(2);
  auto M = k4_generic();
  auto N = random_nf(M, 10, rng);
  auto N2 = act(N, generic_tube_element(M, q(2), 0), 10);
  auto v = equivalence(N, N2, 10);
  ASSERT_EQ(v.outcome, Outcome::Equivalent) << v.reason;
  EXPECT_EQ(v.witness->delta, q(2));
  EXPECT_EQ(v.witness->rho, 0);
  // Symmetry: the inverse witness verifies the other direction.
  auto back = equivalence(N2, N, 10);
  ASSERT_EQ(back.outcome, Outcome::Equivalent);
  EXPECT_TRUE(same_element(*back.witness, inverse(*v.witness)));
}

TEST(Equivalence, Transitive) {
  Rng rng(3);
  auto M = tube_model<Q>(4);
  auto N = random_nf(M, 10, rng);
  auto h1 = generic_tube_element(M, q(1, 2), 1), h2 = generic_tube_element(M, q(3), 1);
  auto N1 = act(N, h1, 10), N2 = act(N1, h2, 10);
  auto v = equivalence(N, N2, 10);
  ASSERT_EQ(v.outcome, Outcome::Equivalent);
  EXPECT_TRUE(same_element(*v.witness, compose(h2, h1)));
}

TEST(Equivalence, OddTypeNegativeDilation) {
  Rng rng(6);
  auto M = tube_model<Q>(5);
  auto N = random_nf(M, 12, rng);
  auto h = generic_tube_element(M, q(-2), 0);
  auto v = equivalence(N, act(N, h, 12), 12);
  ASSERT_EQ(v.outcome, Outcome::Equivalent) << v.reason;
  EXPECT_EQ(v.witness->delta, q(-2));
}

TEST(Equivalence, ModelMismatch) {
  auto A = SurfaceSeries<Q>::from_poly(k4_generic().poly(8));
  auto B = SurfaceSeries<Q>::from_poly(circular_model<Q>(4).poly(8));
  auto v = equivalence(A, B, 8);
  EXPECT_EQ(v.outcome, Outcome::NotEquivalent);
  EXPECT_NE(v.reason.find("model mismatch"), std::string::npos);
}

TEST(Equivalence, DifferentTails) {
  Rng rng(12);
  auto M = k4_generic();
  auto N = random_nf(M, 10, rng);
  auto N2 = N;
  const auto& [key, c] = *std::prev(N.half().end());
  N2.set(key.i, key.j, key.m, c + q(1));
  ASSERT_TRUE(check_normal_form(N2, M, 10).pass);
  EXPECT_EQ(equivalence(N, N2, 10).outcome, Outcome::NotEquivalent);
}

TEST(Equivalence, WeightAboveTruncationThrows) {
  auto A = SurfaceSeries<Q>::from_poly(k4_generic().poly(8));
  EXPECT_THROW(equivalence(A, A, 9), InputError);
}

TEST(Equivalence, CircularWithMu) {
  Rng rng(14);
  auto M = circular_model<Q>(4);
  const int W = 12;
  auto N = random_nf(M, W, rng);
  auto h = circular_element<Q>(4, q(2), qi(1), q(1, 3));
  auto N2 = act(N, h, W);
  auto v = equivalence(N, N2, W);
  ASSERT_EQ(v.outcome, Outcome::Equivalent) << v.reason;
  EXPECT_TRUE(act(N, *v.witness, W).near_equal(N2));
}

TEST(Equivalence, CircularModelOnly) {
  auto P = SurfaceSeries<Q>::from_poly(circular_model<Q>(6).poly(12));
  auto v = equivalence(P, P, 12);
  EXPECT_EQ(v.outcome, Outcome::Equivalent);
}

TEST(Stability, Examples) {
  auto circ = SurfaceSeries<Q>::from_poly(circular_model<Q>(4).poly(12));
  auto s1 = stability_dimension(circ, 12);
  EXPECT_EQ(s1.estimate, 3);
  EXPECT_EQ(s1.bound, 3);

  auto gen = SurfaceSeries<Q>::from_poly(k4_generic().poly(12));
  auto s2 = stability_dimension(gen, 12);
  EXPECT_EQ(s2.estimate, 1);
  EXPECT_EQ(s2.bound, 1);

  auto pert = gen;
  pert.set(3, 3, 0, q(1));
  ASSERT_TRUE(check_normal_form(pert, k4_generic(), 12).pass);
  auto s3 = stability_dimension(pert, 12);
  EXPECT_EQ(s3.estimate, 0);
  EXPECT_EQ(s3.bound, 1);
}

TEST(Stability, CircularPartialSymmetry) {
  // |z|^4 + |z|^6: rotations always fix it; the mu-family first acts at weight 10.
  auto F = surface<Q>(Grading{4}, 12, {{2, 2, 0, q(1)}, {3, 3, 0, q(1)}});
  ASSERT_TRUE(check_normal_form(F, circular_model<Q>(4), 12).pass);
  EXPECT_EQ(stability_dimension(F, 9).estimate, 2);
  EXPECT_EQ(stability_dimension(F, 12).estimate, 1);
}

TEST(Stability, RandomCircularTailBreaksSymmetry) {
  Rng rng(15);
  auto N = random_nf(circular_model<Q>(4), 12, rng);
  EXPECT_EQ(stability_dimension(N, 12).estimate, 0);
}

TEST(NegativeControl, NonIdentityMapsMoveTheModel) {
  Rng rng(16);
  for (const auto& M : {tube_model<Q>(4), k4_generic(), circular_model<Q>(4)}) {
    auto P = SurfaceSeries<Q>::from_poly(M.poly(10));
    for (int r = 0; r < 5; ++r) {
      auto T = random_normalized_map<Q>(Grading{4}, 10, rng, M.cls == ModelClass::Circular);
      if (T.is_identity()) continue;
      EXPECT_FALSE(apply_map(P, T, 10).near_equal(P));
    }
  }
}
