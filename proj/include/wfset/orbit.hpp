#pragma once

#include "group.hpp"

#include <boost/math/tools/roots.hpp>

#include <cmath>
#include <utility>

namespace wfset {

//! Ω(τ,v) = τ(1,v) and ω(v) = (1,v)/√(1+|v|²).
struct OrbitChart {
  static Vec Omega(double tau, const Vec& v) {
    Vec xi(v.size() + 1);
    xi(0) = tau;
    xi.tail(v.size()) = tau * v;
    return xi;
  }
  static Vec omega(const Vec& v) {
    Vec xi(v.size() + 1);
    xi(0) = 1.0;
    xi.tail(v.size()) = v;
    return xi / std::sqrt(1.0 + v.squaredNorm());
  }
  //! Inverse chart on O = {ξ₁ ≠ 0}.
  static std::pair<double, Vec> chart(const Vec& xi) {
    if (xi(0) == 0.0) throw Error(ErrorCode::outside_orbit, "xi_1 = 0 is outside the dual orbit");
    return {xi(0), xi.tail(xi.size() - 1) / xi(0)};
  }
};

struct FrequencyWindow {
  double tau1 = 0.9, tau2 = 1.1, eps0 = 0.1;

  void validate() const {
    if (!(tau1 > 0.0)) throw Error(ErrorCode::precondition, "window requires 0 < tau1");
    if (!(tau1 < 1.0)) throw Error(ErrorCode::precondition, "window requires tau1 < 1");
    if (!(tau2 > 1.0)) throw Error(ErrorCode::precondition, "window requires 1 < tau2");
    if (!(eps0 > 0.0)) throw Error(ErrorCode::precondition, "window requires eps0 > 0");
  }
  bool contains(const Vec& xi) const {
    if (!(xi(0) > 0.0)) return false;
    const double tau = xi(0);
    const double v = xi.tail(xi.size() - 1).norm() / tau;
    return tau > tau1 && tau < tau2 && v < eps0;
  }
};

struct ConeSpec {
  double eps = 0.1;
  double R = 10.0;
  int sign = +1;

  //! ξ ∈ C(sign·W_ε, R).
  bool contains(const Vec& xi) const {
    if (xi.norm() <= R) return false;
    const double x1 = sign * xi(0);
    if (!(x1 > 0.0)) return false;
    return xi.tail(xi.size() - 1).norm() / x1 < eps;
  }
};

/**
 * @brief (h^{-1})ᵀV in orbit coordinates for a > 0.
 *
 * h^{-T}Ω(τ,v) = Ω(τ/a, t + L v) with L = (I + A(t)ᵀ)·diag(a^{1−λ}).
 */
struct TransformedWindow {
  double tau_lo = 0.0, tau_hi = 0.0;
  Vec center;
  Mat L;
};

inline TransformedWindow transformed_window(const ShearletGroup& G, const FrequencyWindow& W,
                                            const GroupElement& g) {
  G.check(g);
  const double a = std::abs(g.a);
  const int n = G.dim_shear();
  Mat Ut = (Mat::Identity(G.d(), G.d()) + G.shear_generator(g.t)).transpose();
  Mat L = Ut.bottomRightCorner(n, n);
  for (int i = 0; i < n; ++i) L.col(i) *= std::pow(a, 1.0 - G.spec().lambdas(i));
  return TransformedWindow{W.tau1 / a, W.tau2 / a, g.t, L};
}

//! min and max of |c + Lu| over |u| ≤ rho (trust-region subproblems, secular equation).
struct EllipsoidNormRange {
  double min = 0.0, max = 0.0;
};

inline EllipsoidNormRange ellipsoid_norm_range(const Vec& c, const Mat& L, double rho) {
  const int n = static_cast<int>(c.size());
  EllipsoidNormRange out;
  Eigen::SelfAdjointEigenSolver<Mat> es(L.transpose() * L);
  const Vec lam = es.eigenvalues();  // ascending
  const Mat Q = es.eigenvectors();
  const Vec b = Q.transpose() * (L.transpose() * c);
  auto tol = boost::math::tools::eps_tolerance<double>(48);
  auto value_at = [&](const Vec& y) { return (c + L * (Q * y)).norm(); };

  // minimum: interior stationary point or boundary with multiplier μ > 0
  {
    Vec u0 = L.fullPivLu().solve(-c);
    if (u0.norm() <= rho) {
      out.min = (c + L * u0).norm();
    } else {
      auto phi = [&](double mu) {
        double s = 0.0;
        for (int i = 0; i < n; ++i) s += b(i) * b(i) / ((lam(i) + mu) * (lam(i) + mu));
        return std::sqrt(s) - rho;
      };
      double hi = b.norm() / rho + 1e-300;
      double lo = 0.0;
      while (phi(hi) > 0) hi *= 2;
      std::uintmax_t it = 200;
      auto r = boost::math::tools::bisect(phi, lo, hi, tol, it);
      const double mu = 0.5 * (r.first + r.second);
      Vec y(n);
      for (int i = 0; i < n; ++i) y(i) = -b(i) / (lam(i) + mu);
      y *= rho / y.norm();
      out.min = value_at(y);
    }
  }
  // maximum: always on the boundary, multiplier μ ≥ λ_max
  {
    const double lmax = lam(n - 1);
    auto phi = [&](double mu) {
      double s = 0.0;
      for (int i = 0; i < n; ++i) {
        const double den = mu - lam(i);
        if (den > 0) s += b(i) * b(i) / (den * den);
      }
      return std::sqrt(s) - rho;
    };
    const double lo = lmax * (1 + 1e-13) + 1e-300;
    if (phi(lo) <= 0) {
      // hard case: top eigenspace (numerically) orthogonal to Lᵀc
      Vec y = Vec::Zero(n);
      double rest = 0.0;
      for (int i = 0; i < n; ++i)
        if (lmax - lam(i) > 1e-13 * std::max(1.0, lmax)) {
          y(i) = b(i) / (lmax - lam(i));
          rest += y(i) * y(i);
        }
      y(n - 1) += std::copysign(std::sqrt(std::max(0.0, rho * rho - rest)), b(n - 1));
      out.max = value_at(y);
    } else {
      double hi = lmax + b.norm() / rho + 1e-300;
      while (phi(hi) > 0) hi = lmax + 2 * (hi - lmax);
      std::uintmax_t it = 300;
      auto r = boost::math::tools::bisect(phi, lo, hi, tol, it);
      const double mu = 0.5 * (r.first + r.second);
      Vec y(n);
      for (int i = 0; i < n; ++i) y(i) = b(i) / (mu - lam(i));
      y *= rho / y.norm();
      out.max = value_at(y);
    }
  }
  return out;
}

//! Boundary tolerance for the K tests.
inline constexpr double kMembershipTol = 1e-12;

/**
 * @brief h^{-T}V ⊂ C(W_ε, R).
 *
 * For a < 0 the set is reflected, so membership requires the opposite cone sign.
 */
inline bool in_Ki_exact(const ShearletGroup& G, const GroupElement& g, const ConeSpec& cone,
                        const FrequencyWindow& W) {
  if ((g.a > 0 ? 1 : -1) * cone.sign < 0) return false;
  const TransformedWindow tw = transformed_window(G, W, g);
  const EllipsoidNormRange r = ellipsoid_norm_range(tw.center, tw.L, W.eps0);
  if (!(r.max < cone.eps - kMembershipTol)) return false;
  return tw.tau_lo * std::sqrt(1.0 + r.min * r.min) >= cone.R;
}

/**
 * @brief h^{-T}V ∩ C(W_ε, R) ≠ ∅.
 *
 * sup of |ξ| over the intersection is (τ₂/a)·√(1+m²), m = min(max_E|v|, ε), since a
 * convex E meeting B_ε but leaving it reaches the sphere |v| = ε.
 */
inline bool in_Ko_exact(const ShearletGroup& G, const GroupElement& g, const ConeSpec& cone,
                        const FrequencyWindow& W) {
  if ((g.a > 0 ? 1 : -1) * cone.sign < 0) return false;
  const TransformedWindow tw = transformed_window(G, W, g);
  const EllipsoidNormRange r = ellipsoid_norm_range(tw.center, tw.L, W.eps0);
  if (!(r.min < cone.eps + kMembershipTol)) return false;
  const double m = std::min(r.max, cone.eps);
  return tw.tau_hi * std::sqrt(1.0 + m * m) > cone.R * (1.0 - kMembershipTol);
}

struct LemmaBox {
  double a = 0.0, delta = 0.0;
  bool contains(const GroupElement& g, int sign = +1) const {
    if ((g.a > 0 ? 1 : -1) * sign < 0) return false;
    return std::abs(g.a) < a && g.t.norm() < delta;
  }
};

inline LemmaBox lemma_box_inner(const ConeSpec& cone, const FrequencyWindow& W) {
  return {W.tau1 / cone.R, cone.eps / 3.0};
}
inline LemmaBox lemma_box_outer(const ConeSpec& cone, const FrequencyWindow& W) {
  return {2.0 * W.tau2 / cone.R, 3.0 * cone.eps};
}

//! 2τ₂·max{1, (2ε₀/ε)^{1/(1−λ_max)}, (2Cε₀)^{1/(1−λ_max)}}.
inline double r_sufficient(const ConeSpec& cone, const FrequencyWindow& W, const ShearletGroup& G) {
  const double p = 1.0 / (1.0 - G.lambda_max());
  const double m = std::max({1.0, std::pow(2.0 * W.eps0 / cone.eps, p),
                             std::pow(2.0 * G.lipschitz_C() * W.eps0, p)});
  return 2.0 * W.tau2 * m;
}

inline bool box_certified(const ConeSpec& cone, const FrequencyWindow& W, const ShearletGroup& G) {
  return cone.eps < 1.0 && cone.R > 1.0 && cone.R >= r_sufficient(cone, W, G);
}

// ---- envelope functions ----

//! A(ξ) = min(|ξ₁|/(1+|ξ'|), 1/(1+|ξ|)).
inline double A_envelope(const Vec& xi) {
  if (xi(0) == 0.0) throw Error(ErrorCode::outside_orbit, "A is defined on xi_1 != 0");
  const double rest = xi.tail(xi.size() - 1).norm();
  return std::min(std::abs(xi(0)) / (1.0 + rest), 1.0 / (1.0 + xi.norm()));
}

inline double A_H(const ShearletGroup& G, const GroupElement& g, const Vec& xi0) {
  return A_envelope(G.to_matrix(g).transpose() * xi0);
}

inline double Theta(const ShearletGroup& G, const GroupElement& g, double s, double t) {
  return std::pow(1.0 + G.operator_norm(g), -s) * std::pow(1.0 + G.inverse_norm(g), -t);
}

struct ThetaParams {
  double s = 0.0, t = 0.0;
  //! Sufficient integrability condition for |det|^{-p}Θ_{s,t}.
  bool integrable(const ShearletGroup& G, double p = 0.0) const {
    const int dh = G.dim_H(), d = G.d();
    return s >= dh + d + 1 && t >= dh + d + d * p;
  }
};

struct PhiResult {
  double quadrature = 0.0;
  double tail_bound = 0.0;
  double value() const { return quadrature + tail_bound; }
};

/**
 * @brief Φ_ℓ(h) = ∫ A(ξ)^ℓ A(hᵀξ)^ℓ dξ on a midpoint lattice over [−T,T]^d.
 *
 * Outside the box the integrand is ≤ (1+|ξ|)^{−ℓ}; the analytic tail
 * |S^{d−1}|(1+T)^{d−ℓ}/(ℓ−d) is reported separately.
 */
inline PhiResult Phi(const ShearletGroup& G, const GroupElement& g, double ell, double T = 64.0,
                     double spacing = 1.0 / 8.0) {
  const int d = G.d();
  if (!(ell > d)) throw Error(ErrorCode::precondition, "Phi requires ell > d");
  const Mat Ht = G.to_matrix(g).transpose();
  const std::int64_t n = static_cast<std::int64_t>(std::llround(2 * T / spacing));
  std::int64_t total = 1;
  for (int k = 0; k < d; ++k) total *= n;
  const std::int64_t rows = total / n;
  std::vector<double> partial(rows, 0.0);
  parallel_for(rows, [&](std::int64_t r) {
    Vec xi(d);
    std::int64_t rem = r;
    for (int k = 1; k < d; ++k) {
      xi(k) = -T + (static_cast<double>(rem % n) + 0.5) * spacing;
      rem /= n;
    }
    double acc = 0.0;
    for (std::int64_t i = 0; i < n; ++i) {
      xi(0) = -T + (static_cast<double>(i) + 0.5) * spacing;
      Vec eta = Ht * xi;
      if (eta(0) == 0.0) continue;
      acc += std::pow(A_envelope(xi) * A_envelope(eta), ell);
    }
    partial[r] = acc;
  });
  double sum = 0.0;
  for (double p : partial) sum += p;
  PhiResult res;
  res.quadrature = sum * std::pow(spacing, d);
  const double sphere = 2.0 * std::pow(pi, 0.5 * d) / std::tgamma(0.5 * d);
  res.tail_bound = sphere * std::pow(1.0 + T, d - ell) / (ell - d);
  return res;
}

/**
 * @brief Lattice quadrature of |det h|^{-p}Θ_{s,t} over H on (t, log a).
 *
 * Both cosets contribute equally; box [−T,T]^{d−1} × [−Lmax, Lmax].
 */
inline double theta_quadrature(const ShearletGroup& G, double s, double t, double p, double T,
                               double Lmax, double spacing) {
  const int n = G.dim_shear();
  const std::int64_t nt = static_cast<std::int64_t>(std::llround(2 * T / spacing));
  const std::int64_t nl = static_cast<std::int64_t>(std::llround(2 * Lmax / spacing));
  std::int64_t cells_t = 1;
  for (int k = 0; k < n; ++k) cells_t *= nt;
  std::vector<double> partial(nl, 0.0);
  parallel_for(nl, [&](std::int64_t il) {
    const double la = -Lmax + (il + 0.5) * spacing;
    const double a = std::exp(la);
    Vec tv(n);
    double acc = 0.0;
    for (std::int64_t c = 0; c < cells_t; ++c) {
      std::int64_t rem = c;
      for (int k = 0; k < n; ++k) {
        tv(k) = -T + (static_cast<double>(rem % nt) + 0.5) * spacing;
        rem /= nt;
      }
      GroupElement g = G.element(tv, a);
      acc += std::pow(std::abs(G.determinant(g)), -p) * Theta(G, g, s, t) * G.haar_weight(g);
    }
    partial[il] = acc;
  });
  double sum = 0.0;
  for (double v : partial) sum += v;
  return 2.0 * sum * std::pow(spacing, n + 1);
}

}  // namespace wfset
