#include <wfset/verifier.hpp>

#include <gtest/gtest.h>

#include <random>

using namespace wfset;

namespace {

Vec v1(double a) { return Vec::Constant(1, a); }
Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

ShearletGroup std2() { return ShearletGroup(standard_basis(v1(0.5))); }
ShearletGroup std3() { return ShearletGroup(standard_basis(v2(0.5, 0.5))); }
ShearletGroup toep3() { return ShearletGroup(toeplitz_basis(3, 1.0 / 3.0)); }

}  // namespace

TEST(StandardBasis, TwoDimensionalShearIsUpperCorner) {
  const GroupSpec s = standard_basis(v1(0.5));
  ASSERT_EQ(s.basis.size(), 1u);
  Mat X(2, 2);
  X << 0, 1, 0, 0;
  EXPECT_EQ(s.basis[0], X);
  EXPECT_EQ(s.family, Family::standard);
}

TEST(StandardBasis, ThreeDimensionalFirstRowAndClosure) {
  const ShearletGroup G = std3();
  const Mat M = G.shear_generator(v2(0.3, -0.7));
  EXPECT_DOUBLE_EQ(M(0, 1), 0.3);
  EXPECT_DOUBLE_EQ(M(0, 2), -0.7);
  EXPECT_EQ((M.bottomRows(2)).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(G.closure_residual(), 0.0);
}

TEST(StandardBasis, DetectionFlags) {
  EXPECT_TRUE(ShearletGroup(standard_basis(v1(0.9))).detection_valid());
  const ShearletGroup bad(standard_basis(v1(1.1)));
  EXPECT_FALSE(bad.detection_valid());
  EXPECT_NE(bad.detection_reason().find("lambda_max < 1"), std::string::npos);
  EXPECT_FALSE(ShearletGroup(standard_basis(v2(0.2, 0.3))).detection_valid());
}

TEST(ToeplitzBasis, TwoDimensionalMatchesStandard) {
  const ShearletGroup T(toeplitz_basis(2, 0.5)), S = std2();
  EXPECT_DOUBLE_EQ(T.spec().lambdas(0), 0.5);
  EXPECT_EQ(T.spec().basis[0], S.spec().basis[0]);
  const GroupElement g = T.element(v1(0.37), -1.7);
  EXPECT_LT((T.to_matrix(g) - S.to_matrix(S.element(v1(0.37), -1.7))).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(ToeplitzBasis, ThreeDimensionalShiftAndCorner) {
  const ShearletGroup G = toep3();
  EXPECT_NEAR(G.spec().lambdas(0), 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(G.spec().lambdas(1), 1.0 / 3.0, 1e-15);
  Mat X2(3, 3), X3(3, 3);
  X2 << 0, 1, 0, 0, 0, 1, 0, 0, 0;
  X3 << 0, 0, 1, 0, 0, 0, 0, 0, 0;
  EXPECT_EQ(G.spec().basis[0], X2);
  EXPECT_EQ(G.spec().basis[1], X3);
  EXPECT_EQ(X2 * X2, X3);
  EXPECT_LT(G.closure_residual(), 1e-12);
  EXPECT_TRUE(G.detection_valid());
}

TEST(Nilpotency, Degrees) {
  EXPECT_EQ(std2().nilpotency_degree(), 2);
  EXPECT_EQ(std3().nilpotency_degree(), 2);
  EXPECT_EQ(toep3().nilpotency_degree(), 3);
}

TEST(Norms, IdentityHasUnitNorm) {
  for (const ShearletGroup& G : {std2(), std3(), toep3()}) EXPECT_NEAR(G.operator_norm(G.identity()), 1.0, 1e-14);
}

TEST(Norms, ClosedForm2x2MatchesSvd) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> Z;
  for (int i = 0; i < 200; ++i) {
    Mat M(2, 2);
    M << Z(rng), Z(rng), Z(rng), Z(rng);
    Eigen::JacobiSVD<Mat> svd(M);
    EXPECT_NEAR(ShearletGroup::operator_norm(M), svd.singularValues()(0), 1e-12 * svd.singularValues()(0));
  }
}

TEST(Elements, RejectZeroScaleAndWrongLength) {
  const ShearletGroup G = std2();
  EXPECT_THROW(G.element(v1(0.0), 0.0), Error);
  EXPECT_THROW(G.element(v2(0, 0), 1.0), Error);
  const ShearletGroup H = std3();
  EXPECT_THROW(G.multiply(G.identity(), H.identity()), Error);
}

TEST(Elements, FromMatrixRejectsNonMembers) {
  const ShearletGroup G = std2();
  Mat M(2, 2);
  M << 1, 0, 0.5, 1;  // lower triangular
  EXPECT_THROW(G.from_matrix(M), Error);
  M << 4, 0.3, 0, 3;  // wrong scaling exponent
  EXPECT_THROW(G.from_matrix(M), Error);
}

TEST(Elements, MatrixFormula2D) {
  const ShearletGroup G = std2();
  const double t = 0.7, a = 0.25;
  Mat expect(2, 2);
  expect << a, -t * std::sqrt(a), 0, std::sqrt(a);
  EXPECT_LT((G.to_matrix(G.element(v1(t), a)) - expect).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_NEAR(G.determinant(G.element(v1(t), a)), std::pow(a, 1.5), 1e-15);
}

class AxiomSuite : public ::testing::TestWithParam<int> {};

TEST_P(AxiomSuite, RandomTriples) {
  const ShearletGroup G = GetParam() == 0 ? std2() : GetParam() == 1 ? std3() : toep3();
  const Report r = check_group_axioms(G, 1000, 100 + GetParam());
  EXPECT_TRUE(r.pass) << (r.notes.empty() ? "" : r.notes[0]);
  EXPECT_LT(r.get("associativity"), 1e-10);
  EXPECT_LT(r.get("inverse_coordinates"), 1e-10);
  EXPECT_LT(r.get("conjugation"), 1e-12);
  EXPECT_EQ(r.get("hadamard_violations"), 0);
}

INSTANTIATE_TEST_SUITE_P(Groups, AxiomSuite, ::testing::Values(0, 1, 2));

TEST(InversionPolynomial, VanishesForStepTwoAndNotForToeplitz) {
  EXPECT_EQ(std3().inversion_polynomial(v2(0.4, -1.2)).cwiseAbs().maxCoeff(), 0.0);
  const Vec B = toep3().inversion_polynomial(v2(0.5, 0.0));
  EXPECT_GT(B.cwiseAbs().maxCoeff(), 0.1);
}

TEST(Haar, WeightIsModularFactor) {
  const ShearletGroup G = std2();
  // |a|^{-(d - tr Y)} with tr Y = 1.5
  EXPECT_NEAR(G.haar_weight(G.element(v1(3.0), 4.0)), std::pow(4.0, -0.5), 1e-15);
  EXPECT_NEAR(G.haar_weight(G.element(v1(3.0), -4.0)), std::pow(4.0, -0.5), 1e-15);
}

TEST(Haar, LeftInvariance2D) {
  const Report r = check_haar_invariance(std2(), 5, 1.0 / 64.0);
  EXPECT_TRUE(r.pass);
  EXPECT_LT(r.get("max_relative_deviation"), 1e-3);
}

TEST(Haar, LeftInvariance3DCoarse) {
  const Report r = check_haar_invariance(std3(), 1, 1.0 / 10.0, 9);
  EXPECT_LT(r.get("max_relative_deviation"), 1e-2);
}

TEST(Haar, WrongWeightIsDetected) {
  // Right translation needs the modular function, so plain left-Haar sums change.
  const ShearletGroup G = std2();
  const auto fs = detail::haar_test_functions(1);
  const GroupElement g0 = G.element(v1(0.4), 2.0);
  auto f = fs[0].f;
  const double base = detail::haar_lattice_sum(G, f, 3.0, -3.0, 3.0, 1.0 / 32);
  const double right = detail::haar_lattice_sum(
      G, [&](const GroupElement& g) { return f(G.multiply(g, g0)); }, 3.0, -4.0, 3.0, 1.0 / 32);
  EXPECT_GT(std::abs(right - base) / base, 0.1);
}
