#pragma once

#include "wavelet.hpp"

#include <functional>
#include <limits>
#include <optional>
#include <tuple>
#include <string>
#include <vector>

namespace wfset {

enum class DistKind { point_delta, line_delta, halfspace_edge, gaussian, grid_function };

inline const char* to_string(DistKind k) {
  switch (k) {
    case DistKind::point_delta: return "point_delta";
    case DistKind::line_delta: return "line_delta";
    case DistKind::halfspace_edge: return "halfspace_edge";
    case DistKind::gaussian: return "gaussian";
    case DistKind::grid_function: return "grid_function";
  }
  return "unknown";
}

/**
 * @brief Cataloged tempered distribution with an exact pairing and known wavefront set.
 *
 * line_delta is δ(x₁ − offset); halfspace_edge is the Heaviside function of x₁ − offset;
 * gaussian has unit mass. grid_function is Σ f_k·spacing^d·δ_{y_k} on a 2D grid.
 */
struct Distribution {
  DistKind kind = DistKind::point_delta;
  int d = 2;
  Vec x0;              // point_delta
  double offset = 0;   // line, halfspace
  Vec center;          // gaussian
  double width = 1.0;  // gaussian
  Mat samples;         // grid_function, samples(i, j) at origin + spacing·(i, j)
  Vec origin;
  double spacing = 1.0;
  int order = 0;

  std::string id() const {
    switch (kind) {
      case DistKind::point_delta: return "point_delta";
      case DistKind::line_delta: return "line_delta(offset=" + std::to_string(offset) + ")";
      case DistKind::halfspace_edge: return "halfspace_edge(offset=" + std::to_string(offset) + ")";
      case DistKind::gaussian: return "gaussian(width=" + std::to_string(width) + ")";
      case DistKind::grid_function: return "grid_function";
    }
    return "unknown";
  }

  bool truth_known() const { return kind != DistKind::grid_function; }

  /**
   * @brief Ground truth: is (x, ±ξ) an N-regular directed point?
   *
   * Real distributions have symmetric wavefront sets, so only ±ξ is tested.
   */
  bool truth_regular(const Vec& x, const Vec& xi, int N) const {
    constexpr double tol = 1e-9;
    const bool normal = xi.tail(xi.size() - 1).norm() <= tol * std::abs(xi(0));
    switch (kind) {
      case DistKind::point_delta: return N <= 0 || (x - x0).norm() > tol;
      case DistKind::line_delta: return N <= 0 || std::abs(x(0) - offset) > tol || !normal;
      case DistKind::halfspace_edge: return N <= 1 || std::abs(x(0) - offset) > tol || !normal;
      case DistKind::gaussian: return true;
      case DistKind::grid_function: break;
    }
    throw Error(ErrorCode::unsupported, "no ground truth for grid functions");
  }

  double density(const Vec& y) const {
    if (kind != DistKind::gaussian) throw Error(ErrorCode::unsupported, "density needs gaussian");
    const double w2 = width * width;
    return std::exp(-0.5 * (y - center).squaredNorm() / w2) / std::pow(2 * pi * w2, 0.5 * d);
  }
  //! û for the kinds with a bounded Fourier transform (gaussian, point_delta).
  cplx fourier(const Vec& xi) const {
    if (kind == DistKind::point_delta) return std::exp(cplx(0.0, -2.0 * pi * x0.dot(xi)));
    if (kind != DistKind::gaussian) throw Error(ErrorCode::unsupported, "fourier needs gaussian or point_delta");
    return std::exp(-2.0 * pi * pi * width * width * xi.squaredNorm()) *
           std::exp(cplx(0.0, -2.0 * pi * center.dot(xi)));
  }
  Vec grid_point(int i, int j) const {
    Vec y(2);
    y << origin(0) + spacing * i, origin(1) + spacing * j;
    return y;
  }
};

inline Distribution make_point_delta(const Vec& x0) {
  Distribution u;
  u.kind = DistKind::point_delta;
  u.d = static_cast<int>(x0.size());
  u.x0 = x0;
  return u;
}
inline Distribution make_line_delta(int d, double offset = 0.0) {
  Distribution u;
  u.kind = DistKind::line_delta;
  u.d = d;
  u.offset = offset;
  return u;
}
inline Distribution make_halfspace(int d, double offset = 0.0) {
  Distribution u;
  u.kind = DistKind::halfspace_edge;
  u.d = d;
  u.offset = offset;
  return u;
}
inline Distribution make_gaussian(const Vec& center, double width) {
  Distribution u;
  u.kind = DistKind::gaussian;
  u.d = static_cast<int>(center.size());
  u.center = center;
  u.width = width;
  return u;
}
inline Distribution make_grid_function(const Mat& samples, const Vec& origin, double spacing) {
  Distribution u;
  u.kind = DistKind::grid_function;
  u.d = 2;
  u.samples = samples;
  u.origin = origin;
  u.spacing = spacing;
  return u;
}

using TestFunction = std::function<cplx(const Vec&)>;

/**
 * @brief u(f̄), the sesquilinear pairing ⟨u | f⟩.
 *
 * Reductions are integrated over [−radius, radius] in the free coordinates.
 */
inline cplx pair(const Distribution& u, const TestFunction& f, double radius = 10.0, int panels = 64) {
  const int d = u.d;
  switch (u.kind) {
    case DistKind::point_delta: return std::conj(f(u.x0));
    case DistKind::line_delta:
    case DistKind::halfspace_edge: {
      const bool half = u.kind == DistKind::halfspace_edge;
      const Nodes1D n1 = half ? composite_gauss(u.offset, u.offset + radius, panels, 16)
                              : Nodes1D{{u.offset}, {1.0}};
      const Nodes1D nr = composite_gauss(-radius, radius, panels, 16);
      std::int64_t cells = 1;
      for (int k = 1; k < d; ++k) cells *= static_cast<std::int64_t>(nr.x.size());
      cplx acc = 0.0;
      Vec y(d);
      for (std::size_t i = 0; i < n1.x.size(); ++i)
        for (std::int64_t c = 0; c < cells; ++c) {
          std::int64_t rem = c;
          double wt = n1.w[i];
          y(0) = n1.x[i];
          for (int k = 1; k < d; ++k) {
            const std::size_t j = rem % nr.x.size();
            rem /= nr.x.size();
            y(k) = nr.x[j];
            wt *= nr.w[j];
          }
          acc += wt * std::conj(f(y));
        }
      return acc;
    }
    case DistKind::gaussian: {
      const double R = 8.0 * u.width;
      const Nodes1D n = composite_gauss(-R, R, std::max(8, panels / 4), 16);
      std::int64_t cells = 1;
      for (int k = 0; k < d; ++k) cells *= static_cast<std::int64_t>(n.x.size());
      cplx acc = 0.0;
      Vec y(d);
      for (std::int64_t c = 0; c < cells; ++c) {
        std::int64_t rem = c;
        double wt = 1.0;
        for (int k = 0; k < d; ++k) {
          const std::size_t j = rem % n.x.size();
          rem /= n.x.size();
          y(k) = u.center(k) + n.x[j];
          wt *= n.w[j];
        }
        acc += wt * u.density(y) * std::conj(f(y));
      }
      return acc;
    }
    case DistKind::grid_function: {
      cplx acc = 0.0;
      const double cell = u.spacing * u.spacing;
      for (int i = 0; i < u.samples.rows(); ++i)
        for (int j = 0; j < u.samples.cols(); ++j)
          acc += cell * u.samples(i, j) * std::conj(f(u.grid_point(i, j)));
      return acc;
    }
  }
  return 0.0;
}

enum class Route { automatic, space, frequency };

//! Sums whose magnitude is below this fraction of their L1 mass are roundoff.
inline constexpr double kNoiseFactor = 64.0 * std::numeric_limits<double>::epsilon();

struct CoefValue {
  cplx value{0.0, 0.0};
  bool flagged = false;  // node budget exhausted
};

/**
 * @brief W_ψu(x,h) = ⟨u | π(x,h)ψ⟩.
 *
 * With M the matrix of h and P = M^{-1}:
 *   [π(x,h)ψ](y) = |det M|^{-1/2} ψ(P(y − x)),
 *   F[π(x,h)ψ](ξ) = |det M|^{1/2} e^{−2πi⟨x,ξ⟩} ψ̂(Mᵀξ).
 * Line and half-space reductions substitute z = P(y − x) so tensor factors separate.
 */
class TransformEngine {
 public:
  explicit TransformEngine(const ShearletGroup& G, int max_panels = 2048)
      : G_(G), max_panels_(max_panels) {}

  CoefValue coefficient(const Distribution& u, const Wavelet& w, const Vec& x, const GroupElement& g,
                        Route route = Route::automatic) const {
    if (u.d != G_.d() || w.d != G_.d() || x.size() != G_.d())
      throw Error(ErrorCode::unsupported, "dimension mismatch between distribution, wavelet and group");
    const Mat M = G_.to_matrix(g);
    const Mat P = G_.inverse_matrix(g);
    const double det = std::abs(M.determinant());
    if (route == Route::automatic) route = default_route(u, w);
    switch (u.kind) {
      case DistKind::point_delta: {
        if (route == Route::frequency)
          throw Error(ErrorCode::unsupported, "point_delta is evaluated space-side only");
        const Wavelet::Resolved r = w.space_resolved(P * (u.x0 - x));
        if (std::abs(r.value) <= r.noise) return {0.0, false};
        return {std::conj(r.value) / std::sqrt(det), false};
      }
      case DistKind::line_delta:
      case DistKind::halfspace_edge: {
        const bool half = u.kind == DistKind::halfspace_edge;
        if (route == Route::space) {
          if (w.kind != WaveletKind::moment_tensor)
            throw Error(ErrorCode::unsupported, "space-side reduction needs a tensor wavelet");
          return half ? halfspace_space(u, w, x, M, det) : line_space(u, w, x, P, det);
        }
        return axis_frequency(u, w, x, M, det, half);
      }
      case DistKind::gaussian:
        if (route == Route::space) return gaussian_space(u, w, x, P, det);
        return gaussian_frequency(u, w, x, M, P, det);
      case DistKind::grid_function: {
        if (route == Route::frequency && w.kind == WaveletKind::bandlimited)
          return grid_frequency(u, w, x, M, P, det);
        cplx acc = 0.0;
        const double cell = u.spacing * u.spacing;
        for (int i = 0; i < u.samples.rows(); ++i)
          for (int j = 0; j < u.samples.cols(); ++j) {
            if (u.samples(i, j) == 0.0) continue;
            acc += cell * u.samples(i, j) * std::conj(w.space(P * (u.grid_point(i, j) - x)));
          }
        return {acc / std::sqrt(det), false};
      }
    }
    throw Error(ErrorCode::unsupported, "unknown distribution");
  }

  static Route default_route(const Distribution& u, const Wavelet& w) {
    switch (u.kind) {
      case DistKind::point_delta: return Route::space;
      case DistKind::line_delta:
      case DistKind::halfspace_edge:
        return w.kind == WaveletKind::moment_tensor ? Route::space : Route::frequency;
      case DistKind::gaussian:
        if (w.kind == WaveletKind::moment_tensor && w.core == Core::spline) return Route::space;
        return Route::frequency;
      case DistKind::grid_function:
        return w.kind == WaveletKind::bandlimited ? Route::frequency : Route::space;
    }
    return Route::space;
  }

  const ShearletGroup& group() const { return G_; }

 private:
  int capped(int p, bool& flag) const {
    if (p > max_panels_) {
      flag = true;
      return max_panels_;
    }
    return p;
  }

  //! z'-box and panels for the tangential factors of a tensor wavelet.
  static double phi_radius(const Wavelet& w) {
    return w.core == Core::gaussian ? 8.5 * w.sigma_phi() : 0.5 * w.spline_order * w.knot_phi();
  }
  static double psi1_scale(const Wavelet& w) {
    return w.core == Core::gaussian ? w.sigma() * 2.0 / (std::sqrt(static_cast<double>(w.r)) + 1.0)
                                    : w.knot() * 0.5;
  }
  static std::pair<double, double> psi1_support(const Wavelet& w) {
    const double c = w.shift();
    // past the Hermite turning point √(2r+1) the Gaussian core decays like e^{−u²/2}
    const double R = w.core == Core::gaussian ? w.sigma() * (std::sqrt(2.0 * w.r + 1.0) + 9.0)
                                              : 0.5 * (w.spline_order + w.r) * w.knot();
    return {c - R, c + R};
  }

  /**
   * @brief ∫ g(α + q·z') ∏φ(z'_j) dz' over the φ box.
   *
   * In one tangential dimension the box is clipped to where α + q z' hits supp ψ₁.
   */
  template <typename F>
  cplx tangential_integral(const Wavelet& w, double alpha, const Vec& q, F&& gfun, bool& flag) const {
    const int n = static_cast<int>(q.size());
    const double rho = phi_radius(w);
    const double scale = psi1_scale(w);
    auto [slo, shi] = psi1_support(w);
    if (n == 1) {
      double lo = -rho, hi = rho;
      if (q(0) != 0.0) {
        double z1 = (slo - alpha) / q(0), z2 = (shi - alpha) / q(0);
        if (z1 > z2) std::swap(z1, z2);
        lo = std::max(lo, z1);
        hi = std::min(hi, z2);
      }
      if (!(hi > lo)) return 0.0;
      const int p = capped(static_cast<int>(std::ceil(std::abs(q(0)) * (hi - lo) / scale)) + 6, flag);
      const Nodes1D nd = composite_gauss(lo, hi, p, 16);
      cplx acc = 0.0;
      for (std::size_t i = 0; i < nd.x.size(); ++i)
        acc += nd.w[i] * gfun(alpha + q(0) * nd.x[i]) * w.phi(nd.x[i]);
      return acc;
    }
    const int p = capped(static_cast<int>(std::ceil(q.norm() * 2 * rho / scale)) + 6, flag);
    const Nodes1D nd = composite_gauss(-rho, rho, p, 12);
    std::int64_t cells = 1;
    for (int k = 0; k < n; ++k) cells *= static_cast<std::int64_t>(nd.x.size());
    cplx acc = 0.0;
    Vec z(n);
    for (std::int64_t c = 0; c < cells; ++c) {
      std::int64_t rem = c;
      double wt = 1.0, ph = 1.0;
      for (int k = 0; k < n; ++k) {
        const std::size_t j = rem % nd.x.size();
        rem /= nd.x.size();
        z(k) = nd.x[j];
        wt *= nd.w[j];
        ph *= w.phi(z(k));
      }
      if (ph == 0.0) continue;
      acc += wt * ph * gfun(alpha + q.dot(z));
    }
    return acc;
  }

  CoefValue line_space(const Distribution& u, const Wavelet& w, const Vec& x, const Mat& P, double det) const {
    const int n = G_.dim_shear();
    const Mat Pp = P.bottomRightCorner(n, n);
    const Mat Ppinv = Pp.inverse();
    const double alpha = P(0, 0) * (u.offset - x(0));
    const Vec q = (P.row(0).tail(n) * Ppinv).transpose();
    bool flag = false;
    const cplx I = tangential_integral(w, alpha, q, [&](double z1) { return cplx(w.psi1(z1), 0.0); }, flag);
    return {std::conj(w.amplitude * I) / (std::sqrt(det) * std::abs(Pp.determinant())), flag};
  }

  CoefValue halfspace_space(const Distribution& u, const Wavelet& w, const Vec& x, const Mat& M, double det) const {
    const int n = G_.dim_shear();
    const double n0 = M(0, 0);
    const Vec np = M.row(0).tail(n).transpose();
    // y₁ = x₁ + n·z > offset  ⇔  z₁ ≷ (offset − x₁ − n'·z')/n₀
    const double alpha = (u.offset - x(0)) / n0;
    const Vec q = -np / n0;
    const double sgn = n0 > 0 ? -1.0 : 1.0;
    bool flag = false;
    const cplx I = tangential_integral(w, alpha, q, [&](double z1) { return cplx(sgn * w.Psi1(z1), 0.0); }, flag);
    // Ψ₁ vanishes on both sides of supp ψ₁ when r ≥ 1, so clipping stays exact
    return {std::conj(w.amplitude * I) * std::sqrt(det), flag};
  }

  //! |det|^{1/2}∫ conj ψ̂(ξ₁c) e^{2πi(x₁−off)ξ₁} [/(2πiξ₁)] dξ₁ with c = Mᵀe₁.
  CoefValue axis_frequency(const Distribution& u, const Wavelet& w, const Vec& x, const Mat& M, double det,
                           bool half) const {
    const Vec c = M.row(0).transpose();
    const double shiftx = x(0) - u.offset;
    std::vector<std::pair<double, double>> intervals;
    if (w.kind == WaveletKind::bandlimited) {
      if (c(0) == 0.0) return {0.0, false};
      const double vnorm = c.tail(c.size() - 1).norm() / std::abs(c(0));
      if (vnorm >= w.window.eps0) return {0.0, false};
      auto lobe = [&](double t1, double t2) {
        double a = t1 / c(0), b = t2 / c(0);
        if (a > b) std::swap(a, b);
        intervals.emplace_back(a, b);
      };
      // in τ = c₀ξ₁ the phase is 2πτ(x₁ − offset)/c₀ and ψ̂ reduces to the τ-bump
      if (w.tau_integral_negligible(shiftx / c(0), half ? -1 : 0)) return {0.0, false};
      lobe(w.window.tau1, w.window.tau2);
      if (w.mirrored) lobe(-w.window.tau2, -w.window.tau1);
    } else {
      const Vec box = w.fourier_box();
      double X = inf;
      for (int k = 0; k < c.size(); ++k)
        if (c(k) != 0.0) X = std::min(X, box(k) / std::abs(c(k)));
      if (!std::isfinite(X))
        throw Error(ErrorCode::unsupported, "frequency route needs a rapidly decaying wavelet transform");
      intervals.emplace_back(-X, 0.0);
      intervals.emplace_back(0.0, X);
    }
    bool flag = false;
    cplx acc = 0.0;
    double mass = 0.0;
    const double shift_rate = w.kind == WaveletKind::moment_tensor ? std::abs(w.shift() * c(0)) : 0.0;
    for (auto [a, b] : intervals) {
      const double phase = 2 * pi * (std::abs(shiftx) + shift_rate) * (b - a);
      const int p = capped(panels_for_phase(phase, 6, 1 << 30), flag);
      const Nodes1D nd = composite_gauss(a, b, p, 16);
      for (std::size_t i = 0; i < nd.x.size(); ++i) {
        const double s = nd.x[i];
        cplx v = std::conj(w.fourier(s * c)) * std::exp(cplx(0.0, 2 * pi * shiftx * s));
        if (half) v /= cplx(0.0, 2 * pi * s);
        acc += nd.w[i] * v;
        mass += nd.w[i] * std::abs(v);
      }
    }
    if (std::abs(acc) <= kNoiseFactor * mass) return {0.0, flag};
    return {acc * std::sqrt(det), flag};
  }

  //! |det|^{1/2}∫ u(x + Mz) conj ψ(z) dz; bandlimited ψ uses y-side quadrature over supp u.
  CoefValue gaussian_space(const Distribution& u, const Wavelet& w, const Vec& x, const Mat& P, double det) const {
    const int d = G_.d();
    bool flag = false;
    if (w.kind == WaveletKind::moment_tensor) {
      // z-side over the tensor support: each axis resolves both ψ and u(x + Mz)
      const Mat M = P.inverse();
      std::vector<Nodes1D> nodes(d);
      std::int64_t cells = 1;
      for (int k = 0; k < d; ++k) {
        double lo, hi, s;
        if (k == 0) {
          std::tie(lo, hi) = psi1_support(w);
          s = psi1_scale(w);
        } else {
          hi = phi_radius(w);
          lo = -hi;
          s = w.core == Core::gaussian ? w.sigma_phi() : 0.5 * w.knot_phi();
        }
        s = std::min(s, u.width / std::max(M.col(k).norm(), 1e-300));
        const int p = capped(static_cast<int>(std::ceil((hi - lo) / s)) + 4, flag);
        nodes[k] = composite_gauss(lo, hi, p, 16);
        cells *= static_cast<std::int64_t>(nodes[k].x.size());
      }
      const std::int64_t inner = static_cast<std::int64_t>(nodes[0].x.size());
      const std::int64_t outer = cells / inner;
      std::vector<cplx> part(outer);
      parallel_for(outer, [&](std::int64_t c) {
        std::int64_t rem = c;
        double wt = 1.0;
        Vec z(d);
        for (int k = 1; k < d; ++k) {
          const std::size_t j = rem % nodes[k].x.size();
          rem /= nodes[k].x.size();
          z(k) = nodes[k].x[j];
          wt *= nodes[k].w[j] * w.phi(z(k));
        }
        cplx s = 0.0;
        if (wt != 0.0)
          for (std::int64_t i = 0; i < inner; ++i) {
            z(0) = nodes[0].x[i];
            s += nodes[0].w[i] * u.density(x + M * z) * w.psi1(z(0));
          }
        part[c] = wt * s;
      });
      cplx acc = 0.0;
      for (const auto& v : part) acc += v;
      return {std::conj(w.amplitude) * acc * std::sqrt(det), flag};
    }
    const double R = 7.0 * u.width;
    // integrate in y over the Gaussian's effective support
    const double rate = w.window.tau2 * std::sqrt(1 + w.window.eps0 * w.window.eps0);
    const double prow = P.cwiseAbs().rowwise().sum().maxCoeff();
    // a 16-point panel resolves two cycles of the oscillation well below 1e-8
    const int p = capped(static_cast<int>(std::ceil(R * prow * rate)) + 4, flag);
    const Nodes1D nd = composite_gauss(-R, R, p, 16);
    std::int64_t cells = 1;
    for (int k = 0; k < d; ++k) cells *= static_cast<std::int64_t>(nd.x.size());
    std::vector<cplx> part(cells);
    parallel_for(cells, [&](std::int64_t c) {
      std::int64_t rem = c;
      double wt = 1.0;
      Vec y(d);
      for (int k = 0; k < d; ++k) {
        const std::size_t j = rem % nd.x.size();
        rem /= nd.x.size();
        y(k) = u.center(k) + nd.x[j];
        wt *= nd.w[j];
      }
      part[c] = wt * u.density(y) * std::conj(w.space(P * (y - x)));
    });
    cplx acc = 0.0;
    for (const auto& v : part) acc += v;
    return {acc / std::sqrt(det), flag};
  }

  //! |det|^{-1/2}∫ û(M^{-T}η) conj ψ̂(η) e^{2πi⟨x, M^{-T}η⟩} dη.
  CoefValue gaussian_frequency(const Distribution& u, const Wavelet& w, const Vec& x, const Mat& M, const Mat& P,
                               double det) const {
    const int d = G_.d();
    const Mat PT = P.transpose();
    const Vec m = P * (x - u.center);  // phase is 2π⟨m, η⟩
    const double rho_u = std::sqrt(40.0 / (2 * pi * pi * u.width * u.width));
    bool flag = false;
    // (M^{-T}η)₁ = η₁/M₀₀, so the whole window can sit where û is below e^{-160}
    if (w.kind == WaveletKind::bandlimited && w.window.tau1 / std::abs(M(0, 0)) > 2 * rho_u) return {0.0, false};
    auto integrand = [&](const Vec& eta) {
      const Vec xi = PT * eta;
      const double q = xi.squaredNorm();
      if (q > 4 * rho_u * rho_u) return cplx(0.0, 0.0);
      return std::exp(-2 * pi * pi * u.width * u.width * q) * std::exp(cplx(0.0, 2 * pi * m.dot(eta))) *
             std::conj(w.fourier(eta));
    };
    if (w.kind == WaveletKind::bandlimited) {
      // η = ±Ω(τ, v), dη = τ^{d−1}dτ dv
      const int n = d - 1;
      const double e0 = w.window.eps0;
      const double pt_phase = 2 * pi * m.norm() * std::sqrt(1 + e0 * e0) * (w.window.tau2 - w.window.tau1);
      const double pv_phase = 2 * pi * w.window.tau2 * m.tail(n).norm() * 2 * e0;
      // the Gaussian factor varies on the scale of ‖M‖/(2πw)
      const int pt = capped(panels_for_phase(pt_phase, 8, 1 << 30), flag);
      const int pv = capped(panels_for_phase(pv_phase, 8, 1 << 30), flag);
      const Nodes1D nt = composite_gauss(w.window.tau1, w.window.tau2, pt, 16);
      const Nodes1D nv = composite_gauss(-e0, e0, pv, 16);
      std::int64_t cells = 1;
      for (int k = 0; k < n; ++k) cells *= static_cast<std::int64_t>(nv.x.size());
      std::vector<cplx> part(cells);
      std::vector<double> mass(cells);
      parallel_for(cells, [&](std::int64_t c) {
        std::int64_t rem = c;
        double wv = 1.0;
        Vec v(n);
        for (int k = 0; k < n; ++k) {
          const std::size_t j = rem % nv.x.size();
          rem /= nv.x.size();
          v(k) = nv.x[j];
          wv *= nv.w[j];
        }
        part[c] = 0.0;
        mass[c] = 0.0;
        if (v.norm() >= e0) return;
        cplx s = 0.0;
        double ms = 0.0;
        for (std::size_t i = 0; i < nt.x.size(); ++i) {
          const Vec eta = OrbitChart::Omega(nt.x[i], v);
          const double jac = nt.w[i] * std::pow(nt.x[i], n);
          for (int sg = 1; sg >= (w.mirrored ? -1 : 1); sg -= 2) {
            const cplx f = integrand(sg * eta);
            s += jac * f;
            ms += jac * std::abs(f);
          }
        }
        part[c] = wv * s;
        mass[c] = wv * ms;
      });
      return finish(part, mass, det, flag);
    }
    const Vec box = w.fourier_box();
    if (!box.allFinite()) throw Error(ErrorCode::unsupported, "frequency route needs a rapidly decaying wavelet transform");
    Vec lo(d), hi(d);
    std::vector<Nodes1D> nodes(d);
    std::int64_t cells = 1;
    for (int k = 0; k < d; ++k) {
      const double ext = std::min(box(k), 2 * rho_u * M.col(k).norm());
      const double shift_rate = k == 0 ? std::abs(w.shift()) : 0.0;
      const double phase = 2 * pi * (std::abs(m(k)) + shift_rate) * 2 * ext;
      const int p = capped(panels_for_phase(phase, 6, 1 << 30), flag);
      // split at 0 so the vanishing factor ψ̂₁ ~ η₁^r is resolved from both sides
      nodes[k] = composite_gauss(-ext, ext, 2 * ((p + 1) / 2), 16);
      cells *= static_cast<std::int64_t>(nodes[k].x.size());
    }
    const std::int64_t inner = static_cast<std::int64_t>(nodes[0].x.size());
    const std::int64_t outer = cells / inner;
    std::vector<cplx> part(outer);
    std::vector<double> mass(outer);
    parallel_for(outer, [&](std::int64_t c) {
      std::int64_t rem = c;
      double wt = 1.0;
      Vec eta(d);
      for (int k = 1; k < d; ++k) {
        const std::size_t j = rem % nodes[k].x.size();
        rem /= nodes[k].x.size();
        eta(k) = nodes[k].x[j];
        wt *= nodes[k].w[j];
      }
      cplx s = 0.0;
      double ms = 0.0;
      for (std::int64_t i = 0; i < inner; ++i) {
        eta(0) = nodes[0].x[i];
        const cplx f = integrand(eta);
        s += nodes[0].w[i] * f;
        ms += nodes[0].w[i] * std::abs(f);
      }
      part[c] = wt * s;
      mass[c] = wt * ms;
    });
    return finish(part, mass, det, flag);
  }

  //! |det|^{-1/2}·Σ parts, or an unresolved zero when the sum sits at roundoff level.
  static CoefValue finish(const std::vector<cplx>& part, const std::vector<double>& mass, double det, bool flag) {
    cplx acc = 0.0;
    double ms = 0.0;
    for (std::size_t k = 0; k < part.size(); ++k) {
      acc += part[k];
      ms += mass[k];
    }
    if (std::abs(acc) <= kNoiseFactor * ms) return {0.0, flag};
    return {acc / std::sqrt(det), flag};
  }

  //! Bandlimited ψ against a grid function: DTFT of the samples on the nodes of supp ψ̂(Mᵀ·).
  CoefValue grid_frequency(const Distribution& u, const Wavelet& w, const Vec& x, const Mat& M, const Mat& P,
                           double det) const {
    (void)M;
    const Mat PT = P.transpose();
    const double e0 = w.window.eps0;
    // phase rate for the grid extent
    const double ext = u.spacing * std::max(u.samples.rows(), u.samples.cols()) + (x - u.origin).norm();
    const double rate = 2 * pi * ext * PT.norm();
    bool flag = false;
    const int pt = capped(panels_for_phase(rate * (w.window.tau2 - w.window.tau1), 4, 1 << 30), flag);
    const int pv = capped(panels_for_phase(rate * w.window.tau2 * 2 * e0, 4, 1 << 30), flag);
    const Nodes1D nt = composite_gauss(w.window.tau1, w.window.tau2, pt, 16);
    const Nodes1D nv = composite_gauss(-e0, e0, pv, 16);
    const double cell = u.spacing * u.spacing;
    std::vector<cplx> part(nv.x.size());
    parallel_for(static_cast<std::int64_t>(nv.x.size()), [&](std::int64_t jv) {
      Vec v(1);
      v(0) = nv.x[jv];
      cplx s = 0.0;
      for (std::size_t i = 0; i < nt.x.size(); ++i)
        for (int sg = 1; sg >= (w.mirrored ? -1 : 1); sg -= 2) {
          const Vec eta = sg * OrbitChart::Omega(nt.x[i], v);
          const Vec xi = PT * eta;
          cplx uh = 0.0;
          for (int a = 0; a < u.samples.rows(); ++a)
            for (int b = 0; b < u.samples.cols(); ++b) {
              if (u.samples(a, b) == 0.0) continue;
              uh += u.samples(a, b) * std::exp(cplx(0.0, -2 * pi * xi.dot(u.grid_point(a, b))));
            }
          s += nt.w[i] * nt.x[i] * cell * uh * std::exp(cplx(0.0, 2 * pi * x.dot(xi))) * std::conj(w.fourier(eta));
        }
      part[jv] = nv.w[jv] * s;
    });
    cplx acc = 0.0;
    for (const auto& v : part) acc += v;
    return {acc / std::sqrt(det), flag};
  }

  const ShearletGroup& G_;
  int max_panels_;
};

/**
 * @brief Batch of coefficients, row = evaluation point, column = dilation.
 */
struct CoefficientField {
  std::vector<Vec> points;
  std::vector<GroupElement> dilations;
  Eigen::MatrixXcd values;
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> flags;
  std::string wavelet_id, distribution_id;
};

inline CoefficientField coefficient_field(const TransformEngine& eng, const Distribution& u, const Wavelet& w,
                                          const std::vector<Vec>& points, const std::vector<GroupElement>& dilations,
                                          Route route = Route::automatic) {
  CoefficientField f;
  f.points = points;
  f.dilations = dilations;
  f.wavelet_id = w.id();
  f.distribution_id = u.id();
  const std::int64_t P = static_cast<std::int64_t>(points.size());
  const std::int64_t D = static_cast<std::int64_t>(dilations.size());
  f.values.resize(P, D);
  f.flags.resize(P, D);
  parallel_for(P * D, [&](std::int64_t k) {
    const std::int64_t i = k / D, j = k % D;
    const CoefValue v = eng.coefficient(u, w, points[i], dilations[j], route);
    f.values(i, j) = v.value;
    f.flags(i, j) = v.flagged;
  });
  return f;
}

}  // namespace wfset
