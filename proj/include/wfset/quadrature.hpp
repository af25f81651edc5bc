#pragma once

#include "common.hpp"

#include <boost/math/special_functions/legendre.hpp>

#include <map>
#include <memory>
#include <mutex>
#include <vector>

namespace wfset {

//! Gauss–Legendre nodes/weights on [−1,1].
struct GaussRule {
  std::vector<double> x, w;
};

inline const GaussRule& gauss_rule(unsigned n) {
  static std::mutex m;
  static std::map<unsigned, std::unique_ptr<GaussRule>> cache;
  std::lock_guard lock(m);
  auto it = cache.find(n);
  if (it != cache.end()) return *it->second;
  auto rule = std::make_unique<GaussRule>();
  const std::vector<double> z = boost::math::legendre_p_zeros<double>(static_cast<int>(n));
  for (double xi : z) {
    const double p = boost::math::legendre_p_prime(static_cast<int>(n), xi);
    const double wi = 2.0 / ((1.0 - xi * xi) * p * p);
    rule->x.push_back(xi);
    rule->w.push_back(wi);
    if (xi != 0.0) {
      rule->x.push_back(-xi);
      rule->w.push_back(wi);
    }
  }
  auto& ref = *rule;
  cache.emplace(n, std::move(rule));
  return ref;
}

//! Composite rule with equal panels on [lo, hi].
struct Nodes1D {
  std::vector<double> x, w;
};

inline Nodes1D composite_gauss(double lo, double hi, int panels, unsigned order = 16) {
  Nodes1D out;
  if (!(hi > lo) || panels < 1) return out;
  const GaussRule& g = gauss_rule(order);
  const double h = (hi - lo) / panels;
  out.x.reserve(panels * g.x.size());
  out.w.reserve(panels * g.x.size());
  for (int p = 0; p < panels; ++p) {
    const double c = lo + (p + 0.5) * h;
    for (std::size_t k = 0; k < g.x.size(); ++k) {
      out.x.push_back(c + 0.5 * h * g.x[k]);
      out.w.push_back(0.5 * h * g.w[k]);
    }
  }
  return out;
}

//! Panels needed to resolve a phase range (radians): two cycles per 16-point panel.
inline int panels_for_phase(double phase_range, int min_panels = 2, int max_panels = 4096) {
  const int p = static_cast<int>(std::ceil(phase_range / (2.0 * pi) * 0.5)) + min_panels;
  return std::min(std::max(p, min_panels), max_panels);
}

template <typename F>
auto integrate(const Nodes1D& n, F&& f) -> decltype(f(0.0)) {
  decltype(f(0.0)) acc{};
  for (std::size_t k = 0; k < n.x.size(); ++k) acc += n.w[k] * f(n.x[k]);
  return acc;
}

}  // namespace wfset
