#include <wfset/verifier.hpp>

#include <gtest/gtest.h>

#include <random>

using namespace wfset;

namespace {

Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

ShearletGroup std2() { return ShearletGroup(standard_basis(Vec::Constant(1, 0.5))); }

const FrequencyWindow kW{0.9, 1.1, 0.1};

}  // namespace

TEST(Bandlimited, FourierSupportIsTheWindow) {
  const Wavelet w = make_bandlimited(kW, false);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> U(-1.5, 1.5);
  int inside = 0;
  for (int i = 0; i < 20000; ++i) {
    const Vec xi = v2(U(rng), U(rng) * 0.2);
    const cplx v = w.fourier(xi);
    if (!kW.contains(xi)) {
      ASSERT_EQ(v, cplx(0.0)) << xi.transpose();
    } else if (std::abs(v) > 0) {
      ++inside;
    }
  }
  EXPECT_GT(inside, 100);
  EXPECT_FALSE(w.real_valued());
}

TEST(Bandlimited, MirroredIsConjugateSymmetric) {
  const Wavelet w = make_bandlimited(kW, true);
  EXPECT_TRUE(w.real_valued());
  for (double x1 : {0.95, 1.0, 1.07})
    for (double x2 : {-0.05, 0.0, 0.03}) {
      const Vec xi = v2(x1, x1 * x2);
      EXPECT_NEAR(std::abs(w.fourier(-xi) - std::conj(w.fourier(xi))), 0.0, 1e-15);
      EXPECT_GT(std::abs(w.fourier(xi)), 0.0);
    }
  const Vec x = v2(0.3, -1.2);
  EXPECT_LT(std::abs(w.space(x).imag()), 1e-12 * std::max(1.0, std::abs(w.space(x))));
}

TEST(Bandlimited, AllMomentsVanish) {
  const Wavelet w = make_bandlimited(kW, false);
  EXPECT_TRUE(check_vanishing_moments(w, 20).pass);
}

TEST(Bandlimited, RejectsBadWindow) {
  EXPECT_THROW(make_bandlimited(FrequencyWindow{1.2, 1.1, 0.1}, false), Error);
}

TEST(MomentWavelet, DeclaredMomentsVanish) {
  for (Core core : {Core::gaussian, Core::spline})
    for (int r : {1, 2, 4, 6}) {
      const Wavelet w = make_moment_wavelet(r, core, 1.0);
      const MomentCheck m = check_vanishing_moments(w, r);
      EXPECT_TRUE(m.pass) << to_string(core) << " r=" << r << " failed at " << m.failed_order;
      const MomentCheck over = check_vanishing_moments(w, r + 1);
      EXPECT_FALSE(over.pass) << to_string(core) << " r=" << r;
      EXPECT_EQ(over.failed_order, r);
    }
}

TEST(MomentWavelet, RequiresPositiveOrder) {
  EXPECT_THROW(make_moment_wavelet(0, Core::gaussian, 1.0), Error);
  EXPECT_THROW(make_moment_wavelet(2, Core::gaussian, 0.0), Error);
}

TEST(MomentWavelet, SplineHasCompactSupport) {
  const Wavelet w = make_moment_wavelet(3, Core::spline, 1.0);
  const double R = w.space_radius();
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> U(-3.0, 3.0);
  int nonzero = 0;
  for (int i = 0; i < 5000; ++i) {
    const Vec x = v2(U(rng), U(rng));
    const cplx v = w.space(x);
    if (x.cwiseAbs().maxCoeff() > R + 1e-12) {
      ASSERT_EQ(v, cplx(0.0)) << x.transpose();
    }
    nonzero += std::abs(v) > 0;
  }
  EXPECT_GT(nonzero, 100);
  EXPECT_TRUE(w.real_valued());
}

TEST(MomentWavelet, FourierMatchesSpaceSamples) {
  // ψ̂(ξ) against a direct Riemann sum of ψ(x)e^{-2πi⟨x,ξ⟩} on the compact support.
  const Wavelet w = make_moment_wavelet(2, Core::spline, 1.0);
  const double R = w.space_radius();
  const int n = 240;
  const double h = 2 * R / n;
  for (const Vec& xi : {v2(0.5, 0.0), v2(1.3, -0.4), v2(-0.2, 0.9)}) {
    cplx acc = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const Vec x = v2(-R + (i + 0.5) * h, -R + (j + 0.5) * h);
        acc += w.space(x) * std::exp(cplx(0, -2 * pi * x.dot(xi)));
      }
    acc *= h * h;
    EXPECT_NEAR(std::abs(acc - w.fourier(xi)), 0.0, 2e-4) << xi.transpose();
  }
}

TEST(MomentWavelet, FourierVanishesToOrderR) {
  // |ψ̂(ξ₁, ξ₂)| ~ |ξ₁|^r near the hyperplane: the log-log slope matches r.
  for (int r : {2, 3, 4}) {
    const Wavelet w = make_moment_wavelet(r, Core::gaussian, 1.0);
    const double a = std::abs(w.fourier(v2(1e-3, 0.3))), b = std::abs(w.fourier(v2(1e-4, 0.3)));
    EXPECT_NEAR(std::log10(a / b), r, 0.05) << "r=" << r;
  }
}

TEST(Admissibility, BandlimitedConvergesAndIsOrbitInvariant) {
  const ShearletGroup G = std2();
  const Wavelet w = make_bandlimited(kW, false);
  const Vec xi0 = v2(1.0, 0.0);
  const AdmissibilityResult A = admissibility_constant(w, G, xi0);
  EXPECT_TRUE(A.converged);
  EXPECT_GT(A.value, 0.0);
  // C_ψ is constant along the h-orbit of ξ₀ (left invariance of dh)
  const GroupElement h0 = G.element(Vec::Constant(1, 0.03), 1.2);
  const Vec xi1 = G.to_matrix(h0).transpose() * xi0;
  const AdmissibilityResult B = admissibility_constant(w, G, xi1);
  EXPECT_LT(std::abs(A.value - B.value) / A.value, 0.02);
  EXPECT_THROW(admissibility_constant(w, G, v2(0.0, 1.0)), Error);
}

TEST(Admissibility, MomentWaveletConverges) {
  const ShearletGroup G = std2();
  const AdmissibilityResult A = admissibility_constant(make_moment_wavelet(4, Core::gaussian, 1.0), G, v2(1.0, 0.0), 1.0 / 16);
  EXPECT_TRUE(A.converged);
  EXPECT_GT(A.value, 0.0);
}

TEST(Admissibility, PlainGaussianIsFlagged) {
  const ShearletGroup G = std2();
  const Wavelet g = make_plain_gaussian(1.0);
  EXPECT_FALSE(check_vanishing_moments(g, 1).pass);
  EXPECT_FALSE(admissibility_constant(g, G, v2(1.0, 0.0), 1.0 / 16).converged);
}

TEST(RequiredMoments, LedgerValues) {
  const ShearletGroup G = std2();
  EXPECT_EQ(required_moments(G, 2, 0), 105);
  EXPECT_GT(required_moments(G, 3, 0), required_moments(G, 2, 0));
  EXPECT_GT(required_moments(G, 2, 1), required_moments(G, 2, 0));
}
