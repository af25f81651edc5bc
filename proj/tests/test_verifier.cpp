#include <wfset/verifier.hpp>

#include <gtest/gtest.h>

using namespace wfset;

namespace {

Vec v1(double a) { return Vec::Constant(1, a); }
Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

ShearletGroup std2() { return ShearletGroup(standard_basis(v1(0.5))); }

const FrequencyWindow kW{0.9, 1.1, 0.1};
const ConeSpec kC{0.1, 10.0, +1};

std::vector<double> dyadic(int from, int to) {
  std::vector<double> s;
  for (int k = from; k <= to; ++k) s.push_back(std::ldexp(1.0, -k));
  return s;
}

}  // namespace

TEST(Ledger, Standard2D) {
  const ConstantsLedger L = compute_ledger(std2(), 2, 0);
  EXPECT_EQ(L.n0, 2);
  EXPECT_DOUBLE_EQ(L.alpha1, 2.0);
  EXPECT_DOUBLE_EQ(L.alpha2, 4.01);
  EXPECT_DOUBLE_EQ(L.gamma0, 5.0);
  EXPECT_DOUBLE_EQ(L.gamma1, 1.0);
  EXPECT_DOUBLE_EQ(L.gamma2, 0.5);
  EXPECT_EQ(L.required_moments, 105);
  EXPECT_GT(L.required_moments, L.moment_bound);
  EXPECT_LE(L.required_moments - 1, L.moment_bound + 1e-9);
  EXPECT_GE(L.assertions.size(), 10u);
}

TEST(Ledger, AffineInOrders) {
  const ShearletGroup G = std2();
  const ConstantsLedger a = compute_ledger(G, 0, 0), b = compute_ledger(G, 3, 2);
  EXPECT_NEAR(b.moment_bound, a.s0 + 3 * a.s1 + 2 * a.s2, 1e-9);
  EXPECT_THROW(compute_ledger(G, -1, 0), Error);
  EXPECT_THROW(compute_ledger(ShearletGroup(standard_basis(v1(1.0))), 1, 0), Error);
}

TEST(Ledger, ToeplitzThreeDimensional) {
  const ConstantsLedger L = compute_ledger(ShearletGroup(toeplitz_basis(3, 1.0 / 3.0)), 1, 0);
  EXPECT_NEAR(L.alpha1, 3.0, 1e-12);
  EXPECT_EQ(L.n0, 3);
  EXPECT_GT(L.required_moments, compute_ledger(std2(), 1, 0).required_moments);
}

TEST(Ledger, IntegerBoundaryIsStrict) {
  EXPECT_EQ(smallest_integer_above(4.0), 5);
  EXPECT_EQ(smallest_integer_above(4.0 + 1e-12), 5);
  EXPECT_EQ(smallest_integer_above(4.2), 5);
  EXPECT_EQ(smallest_integer_above(-0.5), 0);
}

TEST(Gamma, FactorsOnValidRegion) {
  const Report r = check_gamma_factors(25);
  EXPECT_TRUE(r.pass);
  EXPECT_EQ(r.get("violations"), 0);
  EXPECT_GE(r.get("min_factor"), 1.0 - 1e-9);
}

TEST(NormBounds, AHInequality) {
  const ShearletGroup G = std2();
  const Report r = check_AH_inequality(G, 3.0, 20000);
  EXPECT_TRUE(r.pass);
  EXPECT_EQ(r.get("violations"), 0);
  const Report t = check_AH_inequality(ShearletGroup(toeplitz_basis(3, 1.0 / 3.0)), 4.0, 5000);
  EXPECT_TRUE(t.pass);
}

TEST(NormBounds, NormLemmaOnKo) {
  const Report r = check_norm_lemma(std2(), kC, kW, 5000);
  EXPECT_TRUE(r.pass) << (r.notes.empty() ? "" : r.notes[0]);
}

TEST(Overlap, ControlledRowsForShearletExponents) {
  std::vector<OverlapRow> rows;
  OverlapOptions o;
  o.du = 0.5;
  const Report r = check_overlap_control(std2(), kC, kW, {0.0, 1.0}, 6, &rows, o);
  EXPECT_TRUE(r.pass) << (r.notes.empty() ? "" : r.notes[0]);
  ASSERT_EQ(rows.size(), 2u);
  for (const auto& row : rows) {
    EXPECT_LT(row.spread, 10.0);
    EXPECT_LE(row.integrals.front(), row.full_integral * (1 + 1e-9));
  }
}

TEST(Overlap, WeakExponentsAreNotControlled) {
  // s far below γ₀ + γ₁L: the integral cannot keep up with ‖h‖^L.
  OverlapOptions o;
  o.du = 0.5;
  const OverlapRow row = overlap_row(std2(), kC, kW, 2.0, 0.5, 5.0, 12, o);
  EXPECT_GE(row.spread, 10.0);
  EXPECT_LT(row.slope, 2.0 - 0.2);
}

TEST(CrossKernel, BandlimitedPairDecays) {
  const ShearletGroup G = std2();
  const Wavelet psi = make_bandlimited(kW, false);
  CrossKernelOptions o;
  o.ladder_points = 6;
  const Report r = check_cross_kernel_decay(G, psi, psi, 2, 2, 2, 200, o);
  EXPECT_TRUE(r.pass) << (r.notes.empty() ? "" : r.notes[0]);
  EXPECT_GT(r.get("nonzero"), 0);
  EXPECT_TRUE(std::isfinite(r.get("D_empirical")));
}

TEST(CrossKernel, MomentGateRejectsLowOrder) {
  const ShearletGroup G = std2();
  const Wavelet psi = make_bandlimited(kW, false);
  EXPECT_THROW(check_cross_kernel_decay(G, make_moment_wavelet(1, Core::gaussian, 1.0), psi, 2, 2, 2, 10), Error);
}

TEST(CrossKernel, IdentityShiftIsTheAutocorrelation) {
  // K(y, e) = ⟨ψ | ψ(· − y)⟩ up to conjugation; at y = 0 it is ‖ψ‖².
  const ShearletGroup G = std2();
  const Wavelet psi = make_bandlimited(kW, false);
  const CoefValue k0 = cross_kernel(G, psi, psi, Vec::Zero(2), G.identity());
  const CoefValue k1 = cross_kernel(G, psi, psi, v2(0.8, 0.3), G.identity());
  EXPECT_GT(std::abs(k0.value), 0.0);
  EXPECT_NEAR(k0.value.imag(), 0.0, 1e-10 * std::abs(k0.value));
  EXPECT_LT(std::abs(k1.value), std::abs(k0.value));
}

TEST(Convolution, SmallGridReproducesCoefficients) {
  const ShearletGroup G = std2();
  const TransformEngine eng(G);
  const FrequencyWindow W{0.5, 2.0, 0.5};
  const Wavelet psi = make_bandlimited(W, false);
  const double C = admissibility_constant(psi, G, Vec::Unit(2, 0)).value;
  ConvolutionGrid grid;
  grid.x_targets = {Vec::Zero(2)};
  grid.h_targets = {G.identity()};
  std::vector<ConvolutionTarget> tg;
  const Report r = check_convolution_identity(eng, make_gaussian(Vec::Zero(2), 0.3), psi, psi, grid, C, &tg, 6);
  ASSERT_EQ(tg.size(), 1u);
  EXPECT_LT(r.get("max_dev_full"), 0.1);
  EXPECT_FALSE(r.inconclusive);
}

TEST(Convolution, Preconditions) {
  const ShearletGroup G = std2();
  const TransformEngine eng(G);
  ConvolutionGrid grid;
  const Wavelet mom = make_moment_wavelet(2, Core::gaussian, 1.0);
  EXPECT_THROW(check_convolution_identity(eng, make_gaussian(Vec::Zero(2), 0.3), mom, mom, grid, 1.0), Error);
  const Wavelet band = make_bandlimited(kW, false);
  EXPECT_THROW(check_convolution_identity(eng, make_line_delta(2), band, band, grid, 1.0), Error);
}

TEST(Transfer, PointDeltaAndGaussian) {
  const ShearletGroup G = std2();
  const TransformEngine eng(G);
  const ConeSpec cone{0.1, 7.0, +1};
  const DilationLadder Ki = explicit_ladder(G, cone, kW, LadderMode::exact_Ki, dyadic(3, 12), v1(0));
  const DilationLadder Ko = explicit_ladder(G, cone, kW, LadderMode::exact_Ko, dyadic(3, 12), v1(0));
  const Wavelet band = make_bandlimited(kW, false);
  const Wavelet mom = make_moment_wavelet(required_moments(G, 2, 0), Core::gaussian, 1.0);
  for (const Distribution& u : {make_point_delta(Vec::Zero(2)), make_gaussian(Vec::Zero(2), 0.3)}) {
    TransferResult tr;
    const Report r = check_transfer(eng, u, band, mom, Vec::Zero(2), Ki, Ko, 2, 0, {}, &tr);
    EXPECT_TRUE(r.pass) << u.id() << " band=" << tr.band.exponent << " mom=" << tr.moment.exponent;
  }
  EXPECT_THROW(check_transfer(eng, make_point_delta(Vec::Zero(2)), band, make_moment_wavelet(4, Core::gaussian, 1.0),
                              Vec::Zero(2), Ki, Ko, 2, 0),
               Error);
  EXPECT_THROW(check_transfer(eng, make_point_delta(Vec::Zero(2)), band, mom, Vec::Zero(2), Ko, Ki, 2, 0), Error);
}
