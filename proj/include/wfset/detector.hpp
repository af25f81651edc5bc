#pragma once

#include "transform.hpp"

#include <limits>
#include <string>
#include <vector>

namespace wfset {

enum class LadderMode { inner_box, exact_Ki, exact_Ko };

inline const char* to_string(LadderMode m) {
  switch (m) {
    case LadderMode::inner_box: return "inner_box";
    case LadderMode::exact_Ki: return "exact_Ki";
    case LadderMode::exact_Ko: return "exact_Ko";
  }
  return "unknown";
}

/**
 * @brief Geometric ladder h(t, a_j), a_j = a_start·ρ^j, inside a cone-affiliated set.
 */
struct DilationLadder {
  std::vector<GroupElement> elements;
  LadderMode mode = LadderMode::inner_box;
  ConeSpec cone;
  FrequencyWindow window;
};

inline bool ladder_member(const ShearletGroup& G, const GroupElement& g, LadderMode mode, const ConeSpec& cone,
                          const FrequencyWindow& W) {
  switch (mode) {
    case LadderMode::inner_box: return lemma_box_inner(cone, W).contains(g, cone.sign);
    case LadderMode::exact_Ki: return in_Ki_exact(G, g, cone, W);
    case LadderMode::exact_Ko: return in_Ko_exact(G, g, cone, W);
  }
  return false;
}

struct LadderOptions {
  int n_scales = 10;
  double a_start = 0.0;  // 0 selects (8/9)·τ₁/R
  double ratio = 0.5;
  Vec shear;             // empty selects t = 0
};

/**
 * @brief Builds a ladder and filters it through the declared membership test.
 *
 * inner_box requires a certified box (R ≥ r_sufficient) and |t| < δ₀; exact modes
 * drop non-members and fail only when nothing is left.
 */
inline DilationLadder build_ladder(const ShearletGroup& G, const ConeSpec& cone, const FrequencyWindow& W,
                                   LadderMode mode, const LadderOptions& opt = {}) {
  W.validate();
  if (opt.n_scales < 1) throw Error(ErrorCode::precondition, "ladder needs at least one scale");
  if (!(opt.ratio > 0.0 && opt.ratio < 1.0)) throw Error(ErrorCode::precondition, "ladder ratio must lie in (0,1)");
  const Vec t = opt.shear.size() ? opt.shear : Vec::Zero(G.dim_shear());
  const double a_start = opt.a_start > 0 ? opt.a_start : (8.0 / 9.0) * W.tau1 / cone.R;
  DilationLadder L;
  L.mode = mode;
  L.cone = cone;
  L.window = W;
  if (mode == LadderMode::inner_box) {
    if (!box_certified(cone, W, G))
      throw Error(ErrorCode::precondition, "inner box not certified: need R >= r_sufficient = " +
                                               std::to_string(r_sufficient(cone, W, G)));
    const LemmaBox box = lemma_box_inner(cone, W);
    if (!(t.norm() < box.delta))
      throw Error(ErrorCode::precondition, "shear offset " + std::to_string(t.norm()) +
                                               " outside the certified box |t| < " + std::to_string(box.delta));
  }
  double a = a_start;
  for (int j = 0; j < opt.n_scales; ++j, a *= opt.ratio) {
    const GroupElement g = G.element(t, cone.sign * a);
    if (ladder_member(G, g, mode, cone, W)) L.elements.push_back(g);
  }
  if (L.elements.empty())
    throw Error(ErrorCode::precondition, std::string("empty ") + to_string(mode) +
                                             " ladder; loosen the cone (larger eps or smaller R)");
  return L;
}

//! Ladder from explicit scales; membership is still enforced.
inline DilationLadder explicit_ladder(const ShearletGroup& G, const ConeSpec& cone, const FrequencyWindow& W,
                                      LadderMode mode, const std::vector<double>& scales, const Vec& shear) {
  DilationLadder L;
  L.mode = mode;
  L.cone = cone;
  L.window = W;
  for (double a : scales) {
    const GroupElement g = G.element(shear, cone.sign * a);
    if (!ladder_member(G, g, mode, cone, W))
      throw Error(ErrorCode::precondition, "scale a = " + std::to_string(a) + " fails the " + to_string(mode) + " test");
    L.elements.push_back(g);
  }
  return L;
}

inline constexpr double kCoefficientFloor = 1e-300;
inline constexpr int kMinScales = 6;

/**
 * @brief Least-squares slope of log max_y|W| against log‖h‖.
 */
struct DecayEstimate {
  double exponent = 0.0;
  double residual = 0.0;
  int n_points = 0, n_scales = 0;
  bool floored = false;      // some maxima were clamped to the floor
  bool all_zero = false;     // exponent is the +∞ sentinel
  bool quad_flagged = false; // a quadrature hit its node budget
  std::vector<double> log_norm, log_coef;
};

inline DecayEstimate fit_decay(const std::vector<double>& norms, const std::vector<double>& maxima) {
  const int n = static_cast<int>(norms.size());
  if (n < kMinScales)
    throw Error(ErrorCode::precondition, "decay fit needs at least " + std::to_string(kMinScales) + " scales");
  DecayEstimate e;
  e.n_scales = n;
  bool any = false;
  for (int j = 0; j < n; ++j) {
    double m = maxima[j];
    if (m < kCoefficientFloor) {
      m = kCoefficientFloor;
      e.floored = true;
    } else {
      any = true;
    }
    e.log_norm.push_back(std::log(norms[j]));
    e.log_coef.push_back(std::log(m));
  }
  if (!any) {
    e.all_zero = true;
    e.exponent = inf;
    return e;
  }
  double mx = 0, my = 0;
  for (int j = 0; j < n; ++j) {
    mx += e.log_norm[j];
    my += e.log_coef[j];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0;
  for (int j = 0; j < n; ++j) {
    sxx += (e.log_norm[j] - mx) * (e.log_norm[j] - mx);
    sxy += (e.log_norm[j] - mx) * (e.log_coef[j] - my);
  }
  if (!(sxx > 0)) throw Error(ErrorCode::precondition, "ladder norms are not distinct");
  e.exponent = sxy / sxx;
  double rss = 0;
  for (int j = 0; j < n; ++j) {
    const double r = e.log_coef[j] - (my + e.exponent * (e.log_norm[j] - mx));
    rss += r * r;
  }
  e.residual = std::sqrt(rss / n);
  return e;
}

//! x first, then x ± r·e_k cycling through the axes.
inline std::vector<Vec> sample_ball(const Vec& x, double radius, int n_y) {
  if (n_y < 1) throw Error(ErrorCode::precondition, "n_y must be >= 1");
  std::vector<Vec> ys{x};
  const int d = static_cast<int>(x.size());
  for (int k = 0; static_cast<int>(ys.size()) < n_y; ++k) {
    Vec y = x;
    y(k / 2 % d) += (k % 2 ? -radius : radius);
    ys.push_back(y);
  }
  return ys;
}

struct DecayOptions {
  double y_radius = 0.01;
  int n_y = 5;
  Route route = Route::automatic;
};

/**
 * @brief Decay exponent over a ladder, optionally left-translated by a steering element.
 */
inline DecayEstimate estimate_decay(const TransformEngine& eng, const Distribution& u, const Wavelet& w, const Vec& x,
                                    const DilationLadder& ladder, const DecayOptions& opt = {},
                                    const GroupElement* steer = nullptr) {
  const ShearletGroup& G = eng.group();
  const std::vector<Vec> ys = sample_ball(x, opt.y_radius, opt.n_y);
  const int S = static_cast<int>(ladder.elements.size());
  std::vector<GroupElement> hs;
  for (const auto& k : ladder.elements) hs.push_back(steer ? G.multiply(*steer, k) : k);
  const std::int64_t total = static_cast<std::int64_t>(S) * static_cast<std::int64_t>(ys.size());
  std::vector<double> mags(total);
  std::vector<char> flags(total);
  parallel_for(total, [&](std::int64_t k) {
    const CoefValue v = eng.coefficient(u, w, ys[k % ys.size()], hs[k / ys.size()], opt.route);
    mags[k] = std::abs(v.value);
    flags[k] = v.flagged;
  });
  std::vector<double> norms(S), maxima(S, 0.0);
  bool flagged = false;
  for (int j = 0; j < S; ++j) {
    norms[j] = G.operator_norm(hs[j]);
    for (std::size_t i = 0; i < ys.size(); ++i) {
      maxima[j] = std::max(maxima[j], mags[j * ys.size() + i]);
      flagged = flagged || flags[j * ys.size() + i];
    }
  }
  DecayEstimate e = fit_decay(norms, maxima);
  e.n_points = static_cast<int>(ys.size());
  e.quad_flagged = flagged;
  return e;
}

enum class VerdictKind { singular, regular, inconclusive };

inline const char* to_string(VerdictKind v) {
  switch (v) {
    case VerdictKind::singular: return "singular";
    case VerdictKind::regular: return "regular";
    case VerdictKind::inconclusive: return "inconclusive";
  }
  return "unknown";
}

struct DetectionConstants {
  double alpha1 = 0.0, alpha2 = 0.0;
  int d = 0;
};

//! Shearlet constants α₁ = 1/λ_min, α₂ = d/λ_min + ε*.
inline DetectionConstants shearlet_constants(const ShearletGroup& G, double eps_star = 0.01) {
  if (!G.detection_valid()) throw Error(ErrorCode::precondition, "detection constraints fail: " + G.detection_reason());
  if (!(eps_star > 0)) throw Error(ErrorCode::precondition, "eps* must be positive");
  return {1.0 / G.lambda_min(), G.d() / G.lambda_min() + eps_star, G.d()};
}

struct Verdict {
  VerdictKind kind = VerdictKind::inconclusive;
  double theta_nec = 0.0, theta_suf = 0.0;
  DetectionConstants constants;
  int N = 0;
};

inline double theta_necessary(const DetectionConstants& c, int N) { return N - c.alpha1 * c.d / 2.0; }
inline double theta_sufficient(const DetectionConstants& c, int N) {
  return c.alpha1 * N + 1.5 * c.alpha1 * c.d + c.alpha2;
}

inline Verdict classify(const DecayEstimate& est, int N, const DetectionConstants& c) {
  Verdict v;
  v.N = N;
  v.constants = c;
  v.theta_nec = theta_necessary(c, N);
  v.theta_suf = theta_sufficient(c, N);
  if (est.quad_flagged) return v;  // unreliable coefficients never decide
  if (est.exponent < v.theta_nec) v.kind = VerdictKind::singular;
  else if (est.exponent >= v.theta_suf) v.kind = VerdictKind::regular;
  return v;
}

// ---- wavefront map ----

struct WavefrontCell {
  int point = 0, direction = 0;
  bool out_of_orbit = false;
  bool unsigned_class = false;  // real wavelet: verdict covers ±ξ
  DecayEstimate estimate;
  std::vector<Verdict> verdicts;  // one per requested order
};

struct WavefrontMapOptions {
  std::vector<int> orders{1};
  DecayOptions decay;
  double min_orbit_cos = 0.1;  // skip ξ with |ξ₁|/|ξ| below this
};

struct WavefrontMap {
  std::vector<Vec> points, directions;
  std::vector<int> orders;
  std::vector<WavefrontCell> cells;  // point-major
  DetectionConstants constants;
};

/**
 * @brief Steering element g = h(ξ'/ξ₁, sgn ξ₁) with g^{−T}e₁ = ξ/|ξ₁|.
 */
inline GroupElement steering_element(const ShearletGroup& G, const Vec& xi) {
  return G.element(xi.tail(xi.size() - 1) / xi(0), xi(0) > 0 ? 1.0 : -1.0);
}

inline WavefrontMap wavefront_map(const TransformEngine& eng, const Distribution& u, const Wavelet& w,
                                  const DilationLadder& ladder, const std::vector<Vec>& points,
                                  const std::vector<Vec>& directions, const WavefrontMapOptions& opt,
                                  const DetectionConstants& constants) {
  const ShearletGroup& G = eng.group();
  if (ladder.cone.sign < 0) throw Error(ErrorCode::precondition, "wavefront map expects a ladder for the +e1 cone");
  WavefrontMap map;
  map.points = points;
  map.directions = directions;
  map.orders = opt.orders;
  map.constants = constants;
  for (int p = 0; p < static_cast<int>(points.size()); ++p)
    for (int q = 0; q < static_cast<int>(directions.size()); ++q) {
      WavefrontCell cell;
      cell.point = p;
      cell.direction = q;
      cell.unsigned_class = w.real_valued();
      const Vec& xi = directions[q];
      if (xi.size() != G.d() || std::abs(xi(0)) < opt.min_orbit_cos * xi.norm()) {
        cell.out_of_orbit = true;
        map.cells.push_back(cell);
        continue;
      }
      const GroupElement s = steering_element(G, xi);
      cell.estimate = estimate_decay(eng, u, w, points[p], ladder, opt.decay, &s);
      for (int N : opt.orders) cell.verdicts.push_back(classify(cell.estimate, N, constants));
      map.cells.push_back(cell);
    }
  return map;
}

}  // namespace wfset
