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

const FrequencyWindow kW{0.9, 1.1, 0.1};
const ConeSpec kC{0.1, 10.0, +1};

//! Samples of h^{-T}V: all inside the cone (K_i) and any inside (K_o).
std::pair<bool, bool> brute_force(const ShearletGroup& G, const GroupElement& g, std::mt19937_64& rng, int n = 4000) {
  std::uniform_real_distribution<double> U(0.0, 1.0);
  const Mat Mt = G.inverse_matrix(g).transpose();
  bool all = true, any = false;
  for (int i = 0; i < n; ++i) {
    const double tau = kW.tau1 + (kW.tau2 - kW.tau1) * U(rng);
    // include the boundary of the aperture, where the extremes live
    const double v = kW.eps0 * (i % 4 == 0 ? 1.0 - 1e-9 : std::sqrt(U(rng))) * (U(rng) < 0.5 ? -1 : 1);
    const bool in = kC.contains(Mt * OrbitChart::Omega(tau, v1(v)));
    all = all && in;
    any = any || in;
  }
  return {all, any};
}

}  // namespace

TEST(Chart, OmegaAndSphereMap) {
  EXPECT_EQ(OrbitChart::omega(v1(0.0)), Vec::Unit(2, 0));
  const Vec xi = OrbitChart::Omega(2.0, v1(0.5));
  EXPECT_DOUBLE_EQ(xi(0), 2.0);
  EXPECT_DOUBLE_EQ(xi(1), 1.0);
  const auto [tau, v] = OrbitChart::chart(xi);
  EXPECT_DOUBLE_EQ(tau, 2.0);
  EXPECT_DOUBLE_EQ(v(0), 0.5);
  EXPECT_NEAR(OrbitChart::omega(v2(0.3, -0.4)).norm(), 1.0, 1e-15);
  EXPECT_THROW(OrbitChart::chart(v2(0.0, 1.0)), Error);
}

TEST(Window, Validation) {
  EXPECT_NO_THROW(kW.validate());
  EXPECT_THROW((FrequencyWindow{1.0, 1.1, 0.1}.validate()), Error);
  EXPECT_THROW((FrequencyWindow{0.9, 0.95, 0.1}.validate()), Error);
  EXPECT_THROW((FrequencyWindow{0.9, 1.1, 0.0}.validate()), Error);
  EXPECT_TRUE(kW.contains(v2(1.0, 0.05)));
  EXPECT_FALSE(kW.contains(v2(1.0, 0.2)));
  EXPECT_FALSE(kW.contains(v2(-1.0, 0.0)));
}

TEST(Envelope, Examples) {
  EXPECT_DOUBLE_EQ(A_envelope(v2(1, 0)), 0.5);
  EXPECT_DOUBLE_EQ(A_envelope(v2(3, 4)), 1.0 / 6.0);
  EXPECT_THROW(A_envelope(v2(0, 1)), Error);
}

TEST(Envelope, EvenBoundedAndContinuous) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> Z(0.0, 3.0);
  double worst_modulus = 0.0;
  for (int i = 0; i < 5000; ++i) {
    Vec xi = v2(Z(rng), Z(rng));
    if (xi(0) == 0.0) continue;
    const double A = A_envelope(xi);
    EXPECT_LE(A, 1.0);
    EXPECT_GT(A, 0.0);
    EXPECT_DOUBLE_EQ(A, A_envelope(-xi));
    const Vec dx = v2(1e-7, -1e-7);
    if (std::abs(xi(0)) > 1e-5) worst_modulus = std::max(worst_modulus, std::abs(A_envelope(xi + dx) - A) / 1e-7);
  }
  // A is Lipschitz with constant ≤ 2 away from the hyperplane
  EXPECT_LT(worst_modulus, 3.0);
}

TEST(Envelope, AHAtIdentityAndTheta) {
  const ShearletGroup G = std2();
  EXPECT_DOUBLE_EQ(A_H(G, G.identity(), v2(1, 0)), 0.5);
  EXPECT_DOUBLE_EQ(Theta(G, G.identity(), 2, 2), 0.0625);
}

TEST(Envelope, ThetaIntegrabilityGate) {
  const ShearletGroup G = std2();
  EXPECT_EQ(G.dim_H(), 2);
  EXPECT_TRUE((ThetaParams{5, 4}.integrable(G)));
  EXPECT_FALSE((ThetaParams{4.9, 4}.integrable(G)));
  EXPECT_FALSE((ThetaParams{5, 5}.integrable(G, 1.0)));
  EXPECT_TRUE((ThetaParams{5, 6}.integrable(G, 1.0)));
}

TEST(Envelope, PhiFiniteAndStable) {
  const ShearletGroup G = std2();
  const GroupElement h = G.element(v1(0.0), 0.25);
  const PhiResult coarse = Phi(G, h, 4.0, 64.0, 1.0 / 8.0);
  const PhiResult fine = Phi(G, h, 4.0, 64.0, 1.0 / 16.0);
  EXPECT_TRUE(std::isfinite(fine.value()));
  EXPECT_GT(fine.value(), 0.0);
  EXPECT_LT(std::abs(coarse.value() - fine.value()) / fine.value(), 0.01);
  EXPECT_THROW(Phi(G, h, 2.0), Error);
}

TEST(Ellipsoid, NormRangeMatchesSampling) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> Z;
  for (int trial = 0; trial < 50; ++trial) {
    Vec c = v2(Z(rng), Z(rng));
    Mat L(2, 2);
    L << Z(rng), Z(rng), Z(rng), Z(rng);
    const double rho = 0.5 + std::abs(Z(rng));
    const EllipsoidNormRange r = ellipsoid_norm_range(c, L, rho);
    double mn = inf, mx = 0;
    for (int k = 0; k < 4000; ++k) {
      const double th = 2 * pi * k / 4000.0;
      for (double s : {1.0, 0.5, 0.0}) {
        const Vec u = rho * s * v2(std::cos(th), std::sin(th));
        mn = std::min(mn, (c + L * u).norm());
        mx = std::max(mx, (c + L * u).norm());
      }
    }
    EXPECT_LE(r.min, mn + 1e-9);
    EXPECT_GE(r.max, mx - 1e-9);
    EXPECT_NEAR(r.max, mx, 1e-4 * std::max(1.0, mx));
  }
}

TEST(Membership, Examples) {
  const ShearletGroup G = std2();
  EXPECT_TRUE(in_Ki_exact(G, G.element(v1(0.01), 0.05), kC, kW));
  EXPECT_FALSE(in_Ko_exact(G, G.element(v1(5.0), 0.05), kC, kW));
  EXPECT_FALSE(in_Ko_exact(G, G.element(v1(0.0), 10.0), kC, kW));
  // negative scales belong to the reflected cone
  EXPECT_FALSE(in_Ki_exact(G, G.element(v1(0.0), -0.05), kC, kW));
  EXPECT_TRUE(in_Ki_exact(G, G.element(v1(0.0), -0.05), ConeSpec{0.1, 10.0, -1}, kW));
}

TEST(Membership, AgreesWithBruteForce) {
  const ShearletGroup G = std2();
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  int ki = 0, ko = 0;
  for (int i = 0; i < 300; ++i) {
    const double a = std::exp(std::log(1e-3) + U(rng) * std::log(300.0));
    const double t = (U(rng) - 0.5) * 0.8;
    const GroupElement g = G.element(v1(t), a);
    const auto [all, any] = brute_force(G, g, rng);
    const bool eKi = in_Ki_exact(G, g, kC, kW), eKo = in_Ko_exact(G, g, kC, kW);
    if (eKi) EXPECT_TRUE(all) << "a=" << a << " t=" << t;
    if (any) EXPECT_TRUE(eKo) << "a=" << a << " t=" << t;
    ki += eKi;
    ko += eKo;
  }
  EXPECT_GT(ki, 10);
  EXPECT_GT(ko, ki);
}

TEST(LemmaBoxes, Values) {
  const ShearletGroup G = std2();
  EXPECT_DOUBLE_EQ(G.lipschitz_C(), 0.0);
  EXPECT_NEAR(r_sufficient(kC, kW, G), 8.8, 1e-12);
  const LemmaBox in = lemma_box_inner(kC, kW), out = lemma_box_outer(kC, kW);
  EXPECT_NEAR(in.a, 0.09, 1e-15);
  EXPECT_NEAR(in.delta, 0.1 / 3, 1e-15);
  EXPECT_NEAR(out.a, 0.22, 1e-15);
  EXPECT_NEAR(out.delta, 0.3, 1e-15);
  EXPECT_TRUE(box_certified(kC, kW, G));
  EXPECT_FALSE(box_certified(ConeSpec{0.1, 8.0, 1}, kW, G));
}

TEST(LemmaBoxes, SandwichOnSamples) {
  const Report r = check_cone_sandwich(std2(), kC, kW, 10000);
  EXPECT_TRUE(r.pass);
  EXPECT_GT(r.get("inner_box_members"), 100);
  EXPECT_GT(r.get("Ko_members"), r.get("inner_box_members"));
}

TEST(LemmaBoxes, SandwichOnToeplitz3D) {
  const ShearletGroup G(toeplitz_basis(3, 1.0 / 3.0));
  ConeSpec C{0.1, 1.0, 1};
  C.R = 1.05 * r_sufficient(C, kW, G);
  const Report r = check_cone_sandwich(G, C, kW, 4000);
  EXPECT_TRUE(r.pass) << (r.notes.empty() ? "" : r.notes[0]);
}

TEST(LemmaBoxes, InnerBoxSamplesAreInKi) {
  const ShearletGroup G = std2();
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  const LemmaBox in = lemma_box_inner(kC, kW);
  for (int i = 0; i < 10000; ++i) {
    const GroupElement g = G.element(v1((2 * U(rng) - 1) * in.delta * 0.999), in.a * (1e-4 + (1 - 1e-4) * U(rng)) * 0.999);
    ASSERT_TRUE(in_Ki_exact(G, g, kC, kW)) << g.a << " " << g.t(0);
  }
}

TEST(Theta, IntegrabilityObserved) {
  const ShearletGroup G = std2();
  EXPECT_TRUE(check_theta_integrability(G, 5, 4, 0).pass);
  const Report div = check_theta_integrability(G, 2, 0, 0);
  EXPECT_TRUE(div.pass);
  EXPECT_GT(div.get("growth"), 10.0);
}
