#pragma once

#include "orbit.hpp"
#include "quadrature.hpp"

#include <boost/math/differentiation/autodiff.hpp>
#include <boost/math/special_functions/binomial.hpp>

#include <cmath>
#include <limits>
#include <string>

namespace wfset {

enum class WaveletKind { bandlimited, moment_tensor };
enum class Core { gaussian, spline };

inline const char* to_string(WaveletKind k) {
  return k == WaveletKind::bandlimited ? "bandlimited" : "moment_tensor";
}
inline const char* to_string(Core c) { return c == Core::gaussian ? "gaussian" : "spline"; }

//! exp(−1/(1−s²)) on |s| < 1.
inline double bump(double s) {
  const double q = 1.0 - s * s;
  return q > 0.0 ? std::exp(-1.0 / q) : 0.0;
}

/**
 * @brief Closed-form wavelet, either Fourier-side (bandlimited) or space-side (tensor).
 *
 * Tensor wavelets are ψ(x) = ψ₁(x₁)∏φ(x_j) with ψ₁ a scaled r-th derivative of the core.
 * The amplitude multiplies ψ and ψ̂ alike.
 */
class Wavelet {
 public:
  WaveletKind kind = WaveletKind::bandlimited;
  int d = 2;
  cplx amplitude{1.0, 0.0};

  // bandlimited
  FrequencyWindow window;
  bool mirrored = false;

  // moment_tensor
  int r = 0;
  Core core = Core::gaussian;
  double support_radius = 1.0;
  double core_shift = 0.3;  // in units of sigma (gaussian) or knot spacing (spline)
  int spline_order = 6;

  //! L1 norms of τ- and v-derivatives of the window factors, index = order; see prepare_bounds().
  std::vector<double> ibp_tau, ibp_v;
  std::vector<double> ibp_tau0, ibp_tau_inv;  // same for the τ-bump times 1 and times 1/τ
  double mass_v = 0.0;

  bool real_valued() const {
    return (kind == WaveletKind::moment_tensor || mirrored) && amplitude.imag() == 0.0;
  }
  //! Vanishing moments in x₁; bandlimited wavelets have all of them.
  int declared_moments() const { return kind == WaveletKind::bandlimited ? 1 << 20 : r; }
  bool has_space_closed_form() const { return kind == WaveletKind::moment_tensor; }

  std::string id() const {
    if (kind == WaveletKind::bandlimited)
      return std::string("bandlimited") + (mirrored ? "-mirrored" : "") + "(tau=" +
             std::to_string(window.tau1) + ".." + std::to_string(window.tau2) +
             ",eps0=" + std::to_string(window.eps0) + ")";
    return std::string("moment-") + to_string(core) + "(r=" + std::to_string(r) +
           ",R=" + std::to_string(support_radius) + ")";
  }

  // ---- core scales ----
  double sigma() const { return support_radius / (std::sqrt(static_cast<double>(r)) + 4.0); }
  double sigma_phi() const { return support_radius / 4.0; }
  double knot() const { return 2.0 * support_radius / (spline_order + r); }
  double knot_phi() const { return 2.0 * support_radius / spline_order; }
  double shift() const { return core_shift * (core == Core::gaussian ? sigma() : knot()); }

  // ---- 1D factors (tensor) ----
  double psi1(double x) const {
    if (core == Core::gaussian) {
      const double u = (x - shift()) / sigma();
      return ((r % 2) ? -1.0 : 1.0) * normalized_hermite(r, u) * std::exp(-0.5 * u * u);
    }
    double acc = 0.0;
    const double h = knot();
    for (int k = 0; k <= r; ++k)
      acc += ((k % 2) ? -1.0 : 1.0) * boost::math::binomial_coefficient<double>(r, k) *
             bspline((x - shift()) / h + 0.5 * r - k, spline_order);
    return acc;
  }

  //! x₁-antiderivative of ψ₁ vanishing at −∞.
  double Psi1(double x) const {
    if (r < 1) throw Error(ErrorCode::unsupported, "antiderivative needs r >= 1");
    if (core == Core::gaussian) {
      const double u = (x - shift()) / sigma();
      const double sgn = ((r - 1) % 2) ? -1.0 : 1.0;
      return sgn * sigma() / std::sqrt(static_cast<double>(r)) * normalized_hermite(r - 1, u) *
             std::exp(-0.5 * u * u);
    }
    double acc = 0.0;
    const double h = knot();
    for (int k = 0; k <= r; ++k)
      acc += ((k % 2) ? -1.0 : 1.0) * boost::math::binomial_coefficient<double>(r, k) * h *
             bspline_integral((x - shift()) / h + 0.5 * r - k, spline_order);
    return acc;
  }

  double phi(double y) const {
    if (core == Core::gaussian) {
      const double s = sigma_phi();
      return std::exp(-0.5 * y * y / (s * s));
    }
    return bspline(y / knot_phi(), spline_order);
  }
  double phi_integral() const {
    return core == Core::gaussian ? sigma_phi() * std::sqrt(2.0 * pi) : knot_phi();
  }

  cplx psi1_hat(double xi) const {
    if (core == Core::gaussian) {
      if (xi == 0.0) return r == 0 ? cplx(sigma() * std::sqrt(2.0 * pi), 0.0) : cplx(0.0, 0.0);
      const double s = sigma();
      const double logmag = r * std::log(s) - 0.5 * std::lgamma(r + 1.0) +
                            r * std::log(2.0 * pi * std::abs(xi)) + std::log(s * std::sqrt(2.0 * pi)) -
                            2.0 * pi * pi * s * s * xi * xi;
      cplx ir = ipow(r) * (xi < 0 && (r % 2) ? -1.0 : 1.0);
      return ir * std::exp(logmag) * std::exp(cplx(0.0, -2.0 * pi * shift() * xi));
    }
    const double h = knot();
    const double sn = std::sin(pi * h * xi);
    return ipow(r) * std::pow(2.0 * sn, r) * h * std::pow(sinc(h * xi), spline_order) *
           std::exp(cplx(0.0, -2.0 * pi * shift() * xi));
  }
  double phi_hat(double xi) const {
    if (core == Core::gaussian) {
      const double s = sigma_phi();
      return s * std::sqrt(2.0 * pi) * std::exp(-2.0 * pi * pi * s * s * xi * xi);
    }
    const double h = knot_phi();
    return h * std::pow(sinc(h * xi), spline_order);
  }

  // ---- full wavelet ----
  cplx fourier(const Vec& xi) const {
    if (kind == WaveletKind::bandlimited) {
      double v = band_profile(xi);
      if (mirrored) v += band_profile(-xi);
      return amplitude * v;
    }
    cplx acc = psi1_hat(xi(0));
    for (int k = 1; k < xi.size(); ++k) acc *= phi_hat(xi(k));
    return amplitude * acc;
  }

  //! Space-side value; bandlimited wavelets are integrated over V in orbit coordinates.
  cplx space(const Vec& x) const {
    return space_resolved(x).value;
  }

  //! Value plus the roundoff level of its quadrature; |value| ≤ noise means unresolved.
  struct Resolved {
    cplx value;
    double noise = 0.0;
  };
  Resolved space_resolved(const Vec& x) const {
    if (kind == WaveletKind::moment_tensor) return {space_closed(x), 0.0};
    const double copies = mirrored ? 2.0 : 1.0;
    if (!ibp_tau.empty()) {
      const double floor = 64.0 * std::numeric_limits<double>::epsilon() * ibp_tau[0] * mass_v;
      if (band_space_bound(x) <= floor) return {0.0, copies * std::abs(amplitude) * floor};
    }
    double l1 = 0.0;
    cplx plus = band_space(x, &l1);
    if (mirrored) plus = cplx(2.0 * plus.real(), 0.0);
    return {amplitude * plus, 64.0 * std::numeric_limits<double>::epsilon() * std::abs(amplitude) * l1 *
                                  (mirrored ? 2.0 : 1.0)};
  }

  //! |ψ̂(ξ)| < 1e−16·max once any |ξ_k| exceeds box(k).
  Vec fourier_box() const {
    Vec box(d);
    if (kind == WaveletKind::bandlimited) {
      box.setConstant(window.tau2 * window.eps0);
      box(0) = window.tau2;
      return box;
    }
    if (core == Core::spline) return Vec::Constant(d, inf);
    const double s = sigma();
    // |ψ̂₁| ∝ |ξ|^r exp(−2π²σ²ξ²): past the peak, solve the log drop numerically.
    auto logm = [&](double xi) {
      return r * std::log(2.0 * pi * s * xi) - 2.0 * pi * pi * s * s * xi * xi;
    };
    const double peak = r > 0 ? std::sqrt(r / (4.0 * pi * pi * s * s)) : 0.0;
    const double ref = r > 0 ? logm(peak) : 0.0;
    double x = std::max(peak, 1e-3 / s);
    while ((r > 0 ? logm(x) : -2.0 * pi * pi * s * s * x * x) > ref - 40.0) x *= 1.1;
    box(0) = x;
    const double sp = sigma_phi();
    for (int k = 1; k < d; ++k) box(k) = std::sqrt(40.0 / (2.0 * pi * pi * sp * sp));
    return box;
  }

  //! Space radius beyond which the tensor wavelet is negligible (compact for splines).
  double space_radius() const {
    if (kind == WaveletKind::moment_tensor)
      return core == Core::spline ? support_radius + std::abs(shift()) : 1.6 * support_radius + std::abs(shift());
    return inf;
  }

  static double normalized_hermite(int n, double u) {
    // He_n(u)/sqrt(n!) by the stable three-term recurrence
    if (n == 0) return 1.0;
    double qm1 = 1.0, q = u;
    for (int k = 1; k < n; ++k) {
      const double qn = (u * q - std::sqrt(static_cast<double>(k)) * qm1) / std::sqrt(k + 1.0);
      qm1 = q;
      q = qn;
    }
    return q;
  }

  //! Centered cardinal B-spline of order m (support [−m/2, m/2], unit integral).
  static double bspline(double x, int m) {
    const double y = x + 0.5 * m;
    if (y <= 0.0 || y >= m) return 0.0;
    double acc = 0.0;
    for (int j = 0; j <= m; ++j) {
      const double z = y - j;
      if (z <= 0.0) break;
      acc += ((j % 2) ? -1.0 : 1.0) * boost::math::binomial_coefficient<double>(m, j) *
             std::pow(z, m - 1);
    }
    return acc / std::tgamma(static_cast<double>(m));
  }
  static double bspline_integral(double x, int m) {
    const double y = x + 0.5 * m;
    if (y <= 0.0) return 0.0;
    if (y >= m) return 1.0;
    double acc = 0.0;
    for (int j = 0; j <= m; ++j) {
      const double z = y - j;
      if (z <= 0.0) break;
      acc += ((j % 2) ? -1.0 : 1.0) * boost::math::binomial_coefficient<double>(m, j) *
             std::pow(z, m);
    }
    return acc / std::tgamma(m + 1.0);
  }

  /**
   * @brief Integration-by-parts bound on |∫_V b(ξ)e^{2πi⟨x,ξ⟩}dξ|.
   *
   * In τ the phase rate is 2π(x₁ + ⟨v,x'⟩) ≥ 2π(|x₁| − ε₀|x'|); in v (d = 2) it is 2πτ|x₂| ≥ 2πτ₁|x₂|.
   */
  double band_space_bound(const Vec& x) const {
    const int n = d - 1;
    const double xr = x.tail(n).norm();
    double best = ibp_tau.empty() ? inf : ibp_tau[0] * mass_v;
    const double s_min = std::abs(x(0)) - window.eps0 * xr;
    if (s_min > 0)
      for (std::size_t k = 1; k < ibp_tau.size(); ++k)
        best = std::min(best, mass_v * ibp_tau[k] / std::pow(2 * pi * s_min, static_cast<double>(k)));
    if (n == 1 && xr > 0)
      for (std::size_t k = 1; k < ibp_v.size(); ++k)
        best = std::min(best, ibp_tau[0] * ibp_v[k] / std::pow(2 * pi * window.tau1 * xr, static_cast<double>(k)));
    return best;
  }

  //! Fills ibp_tau, ibp_v and mass_v for the bandlimited window.
  void prepare_bounds() {
    using namespace boost::math::differentiation;
    constexpr unsigned K = 20;
    const int n = d - 1;
    const double c = 0.5 * (window.tau1 + window.tau2), w = 0.5 * (window.tau2 - window.tau1);
    const Nodes1D nt = composite_gauss(window.tau1, window.tau2, 256, 16);
    ibp_tau.assign(K + 1, 0.0);
    ibp_tau0.assign(K + 1, 0.0);
    ibp_tau_inv.assign(K + 1, 0.0);
    for (std::size_t i = 0; i < nt.x.size(); ++i) {
      const auto t = make_fvar<double, K>(nt.x[i]);
      const auto u = (t - c) / w;
      const auto b = exp(-1.0 / (1.0 - u * u));
      auto f = b;
      for (int j = 0; j < n; ++j) f *= t;
      const auto finv = b / t;
      for (unsigned k = 0; k <= K; ++k) {
        ibp_tau[k] += nt.w[i] * std::abs(f.derivative(k));
        ibp_tau0[k] += nt.w[i] * std::abs(b.derivative(k));
        ibp_tau_inv[k] += nt.w[i] * std::abs(finv.derivative(k));
      }
    }
    const double e0 = window.eps0;
    ibp_v.clear();
    if (n == 1) {
      const Nodes1D nv = composite_gauss(-e0, e0, 256, 16);
      ibp_v.assign(K + 1, 0.0);
      for (std::size_t i = 0; i < nv.x.size(); ++i) {
        const auto v = make_fvar<double, K>(nv.x[i]) / e0;
        const auto f = exp(-1.0 / (1.0 - v * v));
        for (unsigned k = 0; k <= K; ++k) ibp_v[k] += nv.w[i] * std::abs(f.derivative(k));
      }
      mass_v = ibp_v[0];
    } else {
      // radial bump over the ε₀-ball
      const Nodes1D nr = composite_gauss(0.0, 1.0, 64, 16);
      double rad = 0.0;
      for (std::size_t i = 0; i < nr.x.size(); ++i) rad += nr.w[i] * bump(nr.x[i]) * std::pow(nr.x[i], n - 1);
      mass_v = rad * std::pow(e0, n) * 2.0 * std::pow(pi, 0.5 * n) / std::tgamma(0.5 * n);
    }
    // the computed norms are estimates; inflate so the bound stays conservative
    for (auto* vec : {&ibp_tau, &ibp_tau0, &ibp_tau_inv, &ibp_v}) {
      if (vec->empty()) continue;
      for (std::size_t k = 1; k < vec->size(); ++k) (*vec)[k] *= 2.0;
    }
  }

  /**
   * @brief True when ∫ b_τ(τ)τ^p e^{2πiτX}dτ (p = 0 or −1) provably sits below roundoff.
   */
  bool tau_integral_negligible(double X, int p) const {
    const std::vector<double>& nrm = p == 0 ? ibp_tau0 : ibp_tau_inv;
    if (nrm.empty() || X == 0.0) return false;
    const double floor = 64.0 * std::numeric_limits<double>::epsilon() * nrm[0];
    for (std::size_t k = 1; k < nrm.size(); ++k)
      if (nrm[k] / std::pow(2 * pi * std::abs(X), static_cast<double>(k)) <= floor) return true;
    return false;
  }

  cplx space_closed(const Vec& x) const {
    double acc = psi1(x(0));
    for (int k = 1; k < x.size(); ++k) acc *= phi(x(k));
    return amplitude * acc;
  }

  double band_profile(const Vec& xi) const {
    const double tau = xi(0);
    if (!(tau > window.tau1 && tau < window.tau2)) return 0.0;
    const double c = 0.5 * (window.tau1 + window.tau2), w = 0.5 * (window.tau2 - window.tau1);
    const double v = xi.tail(xi.size() - 1).norm() / tau;
    return bump((tau - c) / w) * bump(v / window.eps0);
  }

 private:
  static cplx ipow(int n) {
    switch (((n % 4) + 4) % 4) {
      case 0: return {1, 0};
      case 1: return {0, 1};
      case 2: return {-1, 0};
      default: return {0, -1};
    }
  }
  static double sinc(double x) { return x == 0.0 ? 1.0 : std::sin(pi * x) / (pi * x); }

 public:
  //! ∫_V b(ξ)e^{2πi⟨x,ξ⟩}dξ with dξ = τ^{d−1}dτ dv.
  cplx band_space(const Vec& x, double* l1 = nullptr) const {
    const int n = d - 1;
    const double xr = x.tail(n).norm();
    const int pt = panels_for_phase(2 * pi * (std::abs(x(0)) + xr * window.eps0) * (window.tau2 - window.tau1), 4);
    const Nodes1D nt = composite_gauss(window.tau1, window.tau2, pt, 16);
    const int pv = panels_for_phase(2 * pi * window.tau2 * xr * 2 * window.eps0, 4);
    const Nodes1D nv = composite_gauss(-window.eps0, window.eps0, pv, 16);
    const double c = 0.5 * (window.tau1 + window.tau2), w = 0.5 * (window.tau2 - window.tau1);
    cplx acc = 0.0;
    double mass = 0.0;
    const std::size_t nvn = nv.x.size();
    std::size_t total = 1;
    for (int k = 0; k < n; ++k) total *= nvn;
    Vec v(n);
    for (std::size_t cidx = 0; cidx < total; ++cidx) {
      std::size_t rem = cidx;
      double wv = 1.0;
      for (int k = 0; k < n; ++k) {
        const std::size_t j = rem % nvn;
        rem /= nvn;
        v(k) = nv.x[j];
        wv *= nv.w[j];
      }
      const double bv = bump(v.norm() / window.eps0);
      if (bv == 0.0) continue;
      const double proj = x(0) + v.dot(x.tail(n));
      cplx inner = 0.0;
      for (std::size_t i = 0; i < nt.x.size(); ++i) {
        const double tau = nt.x[i];
        const double bt = bump((tau - c) / w);
        inner += nt.w[i] * bt * std::pow(tau, n) * std::exp(cplx(0.0, 2.0 * pi * tau * proj));
        mass += wv * bv * nt.w[i] * bt * std::pow(tau, n);
      }
      acc += wv * bv * inner;
    }
    if (l1) *l1 = mass;
    return acc;
  }
};

inline Wavelet make_bandlimited(const FrequencyWindow& window, bool mirrored, int d = 2) {
  window.validate();
  Wavelet w;
  w.kind = WaveletKind::bandlimited;
  w.d = d;
  w.window = window;
  w.mirrored = mirrored;
  w.prepare_bounds();
  return w;
}

inline Wavelet make_moment_wavelet(int r, Core core, double support_radius, int d = 2,
                                   double core_shift = 0.3) {
  if (r < 1) throw Error(ErrorCode::precondition, "moment wavelet requires r >= 1");
  if (!(support_radius > 0)) throw Error(ErrorCode::precondition, "support_radius must be > 0");
  Wavelet w;
  w.kind = WaveletKind::moment_tensor;
  w.d = d;
  w.r = r;
  w.core = core;
  w.support_radius = support_radius;
  w.core_shift = core_shift;
  return w;
}

//! A Gaussian with no vanishing moment; not admissible. Used to exercise divergence checks.
inline Wavelet make_plain_gaussian(double support_radius, int d = 2) {
  Wavelet w;
  w.kind = WaveletKind::moment_tensor;
  w.d = d;
  w.r = 0;
  w.core = Core::gaussian;
  w.support_radius = support_radius;
  w.core_shift = 0.0;
  return w;
}

struct MomentCheck {
  bool pass = true;
  int failed_order = -1;
  double residual = 0.0;
};

/**
 * @brief Vanishing moments ∫x₁^kψ₁ = 0 for k < r.
 *
 * Tensor wavelets: relative residual |m_k| / ∫|x|^k|ψ₁| against tol. Bandlimited:
 * finite differences of ψ̂ in ξ₁ across the hyperplane ξ₁ = 0.
 */
inline MomentCheck check_vanishing_moments(const Wavelet& w, int r, double tol = 1e-10) {
  if (r < 1) throw Error(ErrorCode::precondition, "r >= 1 required");
  MomentCheck out;
  if (w.kind == WaveletKind::bandlimited) {
    const double h = 1e-3;
    Vec xi = Vec::Zero(w.d);
    for (int j = -5; j <= 5; ++j) {
      xi.tail(w.d - 1).setConstant(0.2 * j);
      for (int k = 0; k < r; ++k) {
        // k-th central difference at ξ₁ = 0
        cplx acc = 0.0;
        for (int m = 0; m <= k; ++m) {
          Vec p = xi;
          p(0) = (0.5 * k - m) * h;
          acc += ((m % 2) ? -1.0 : 1.0) * boost::math::binomial_coefficient<double>(k, m) * w.fourier(p);
        }
        const double res = std::abs(acc) / std::pow(h, k);
        if (res > tol) return {false, k, res};
      }
    }
    return out;
  }
  const double c = w.shift();
  const double R = w.space_radius() * 1.5;
  const int panels = w.core == Core::spline ? 4 * (w.spline_order + w.r) : 64 + 4 * w.r;
  const Nodes1D nodes = composite_gauss(c - R, c + R, panels, 20);
  for (int k = 0; k < r; ++k) {
    double m = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < nodes.x.size(); ++i) {
      const double x = nodes.x[i];
      const double p = std::pow(x, k) * w.psi1(x);
      m += nodes.w[i] * p;
      scale += nodes.w[i] * std::abs(p);
    }
    const double res = scale > 0 ? std::abs(m) / scale : 0.0;
    if (res > tol) return {false, k, res};
  }
  return out;
}

struct AdmissibilityResult {
  double value = 0.0;
  double coarse_value = 0.0;   // at twice the spacing
  double extended_value = 0.0; // on a box enlarged toward a → 0 and a → ∞
  double refinement_change = 0.0;
  double extension_change = 0.0;
  bool converged = false;
  double t_max = 0.0, loga_min = 0.0, loga_max = 0.0;
  double spacing = 0.0;
};

namespace detail {

inline double haar_lattice_sum(const ShearletGroup& G, const std::function<double(const GroupElement&)>& f,
                               double tmax, double lmin, double lmax, double spacing) {
  const int n = G.dim_shear();
  const std::int64_t nt = std::max<std::int64_t>(1, std::llround(2 * tmax / spacing));
  const std::int64_t nl = std::max<std::int64_t>(1, std::llround((lmax - lmin) / spacing));
  const double dt = 2 * tmax / nt, dl = (lmax - lmin) / nl;
  std::int64_t cells_t = 1;
  for (int k = 0; k < n; ++k) cells_t *= nt;
  std::vector<double> partial(nl, 0.0);
  parallel_for(nl, [&](std::int64_t il) {
    const double a = std::exp(lmin + (il + 0.5) * dl);
    Vec tv(n);
    double acc = 0.0;
    for (int sg = -1; sg <= 1; sg += 2)
      for (std::int64_t c = 0; c < cells_t; ++c) {
        std::int64_t rem = c;
        for (int k = 0; k < n; ++k) {
          tv(k) = -tmax + (static_cast<double>(rem % nt) + 0.5) * dt;
          rem /= nt;
        }
        GroupElement g = G.element(tv, sg * a);
        acc += f(g) * G.haar_weight(g);
      }
    partial[il] = acc;
  });
  double s = 0.0;
  for (double v : partial) s += v;
  return s * std::pow(dt, n) * dl;
}

}  // namespace detail

/**
 * @brief C_ψ = ∫_H |ψ̂(hᵀξ₀)|² dh on a (t, log a) lattice.
 *
 * The box grows until the integrand is negligible on its faces or a hard limit is
 * reached; the result is compared against a coarser lattice and an enlarged box.
 */
inline AdmissibilityResult admissibility_constant(const Wavelet& w, const ShearletGroup& G, const Vec& xi0,
                                                  double spacing = 1.0 / 64.0) {
  if (xi0(0) == 0.0) throw Error(ErrorCode::outside_orbit, "xi0 must lie in the dual orbit");
  auto f = [&](const GroupElement& g) {
    return std::norm(w.fourier(G.to_matrix(g).transpose() * xi0));
  };
  const int n = G.dim_shear();
  double tmax = 1.0, lmin = -1.0, lmax = 1.0;
  const double kLogLimit = 40.0, kTLimit = 1e4;
  struct Probe {
    double interior = 0, tface = 0, low = 0, high = 0;
  };
  auto probe = [&](double tm, double l0, double l1) {
    const int m = n == 1 ? 41 : 21;
    std::int64_t cells = 1;
    for (int k = 0; k < n; ++k) cells *= m;
    Probe p;
    Vec tv(n);
    for (int i = 0; i < m; ++i) {
      const double la = l0 + (l1 - l0) * i / (m - 1.0);
      for (std::int64_t c = 0; c < cells; ++c) {
        std::int64_t rem = c;
        bool on_t_face = false;
        for (int k = 0; k < n; ++k) {
          const int jj = static_cast<int>(rem % m);
          rem /= m;
          tv(k) = -tm + 2 * tm * jj / (m - 1.0);
          on_t_face = on_t_face || jj == 0 || jj == m - 1;
        }
        double v = 0;
        for (int sg = -1; sg <= 1; sg += 2) v = std::max(v, f(G.element(tv, sg * std::exp(la))));
        p.interior = std::max(p.interior, v);
        if (on_t_face) p.tface = std::max(p.tface, v);
        if (i == 0) p.low = std::max(p.low, v);
        if (i == m - 1) p.high = std::max(p.high, v);
      }
    }
    return p;
  };
  double interior = 0.0;
  for (int iter = 0; iter < 200; ++iter) {
    const Probe p = probe(tmax, lmin, lmax);
    interior = std::max(interior, p.interior);
    const double thr = 1e-14 * std::max(interior, 1e-300);
    bool grew = false;
    if (p.tface > thr && tmax < kTLimit) {
      tmax *= 1.5;
      grew = true;
    }
    if (p.low > thr && lmin > -kLogLimit) {
      lmin -= 1.0;
      grew = true;
    }
    if (p.high > thr && lmax < kLogLimit) {
      lmax += 1.0;
      grew = true;
    }
    if (!grew) break;
  }
  AdmissibilityResult res;
  res.t_max = tmax;
  res.loga_min = lmin;
  res.loga_max = lmax;
  // keep the lattice within a fixed cell budget; a divergent integrand runs into the box limits
  const double budget = 4e6;
  double cells = (lmax - lmin) / spacing * std::pow(2 * tmax / spacing, n) * 2;
  if (cells > budget) spacing *= std::pow(cells / budget, 1.0 / (n + 1));
  res.spacing = spacing;
  res.value = detail::haar_lattice_sum(G, f, tmax, lmin, lmax, spacing);
  res.coarse_value = detail::haar_lattice_sum(G, f, tmax, lmin, lmax, 2 * spacing);
  res.extended_value = detail::haar_lattice_sum(G, f, 1.5 * tmax, lmin - 4.0, lmax + 4.0, 2 * spacing);
  auto rel = [](double a, double b) { return std::abs(a - b) / std::max(std::abs(a), 1e-300); };
  res.refinement_change = rel(res.value, res.coarse_value);
  res.extension_change = rel(res.coarse_value, res.extended_value);
  res.converged = res.value > 0 && res.refinement_change <= 0.05 && res.extension_change <= 0.05 &&
                  lmin > -kLogLimit && lmax < kLogLimit && tmax < kTLimit;
  return res;
}

}  // namespace wfset
