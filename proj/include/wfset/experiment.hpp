#pragma once

#include "config.hpp"
#include "io.hpp"

#include <map>
#include <string>
#include <vector>

namespace wfset {

/**
 * @brief Result of one subcommand: exit status, named output files, console summary.
 *
 * Status 0 means success and 1 means a check ran and failed. Usage errors are raised as
 * ConfigError and mapped to 2 by the caller.
 */
struct RunOutput {
  int status = 0;
  std::map<std::string, std::string> files;  // relative path → bytes
  std::vector<std::string> summary;
};

namespace detail {

inline std::string join(const Vec& v, const char* sep = ",") {
  std::string s;
  for (int i = 0; i < v.size(); ++i) s += (i ? sep : "") + format_number(v(i));
  return s;
}

struct Setup {
  ShearletGroup G;
  FrequencyWindow W;
  ConeSpec cone;
};

inline Setup make_setup(const ExperimentConfig& cfg) {
  ShearletGroup G(make_group_spec(cfg.group));
  cfg.window.validate();
  const ConeSpec cone = make_cone(cfg.cone, cfg.window, G);
  return {std::move(G), cfg.window, cone};
}

//! Snapshot shared by every table: group, window, cone, detection constants, seed.
inline void snapshot(TsvTable& t, const ExperimentConfig& cfg, const Setup& s) {
  t.constant("family", to_string(s.G.spec().family));
  t.constant("d", s.G.d());
  t.constant("lambda", "[" + join(s.G.spec().lambdas) + "]");
  t.constant("n_s", s.G.nilpotency_degree());
  if (s.G.detection_valid()) {
    const DetectionConstants c = shearlet_constants(s.G, cfg.detect.eps_star);
    t.constant("alpha1", c.alpha1);
    t.constant("alpha2", c.alpha2);
  }
  t.constant("tau1", s.W.tau1);
  t.constant("tau2", s.W.tau2);
  t.constant("eps0", s.W.eps0);
  t.constant("cone_eps", s.cone.eps);
  t.constant("cone_R", s.cone.R);
  t.constant("seed", static_cast<double>(cfg.seed));
}

inline std::vector<Vec> point_grid(int d, int n, double extent) {
  std::vector<double> axis;
  for (int i = 0; i < n; ++i) axis.push_back(n == 1 ? 0.0 : -extent + 2.0 * extent * i / (n - 1));
  std::int64_t total = 1;
  for (int k = 0; k < d; ++k) total *= n;
  std::vector<Vec> pts;
  for (std::int64_t c = 0; c < total; ++c) {
    Vec p(d);
    std::int64_t rem = c;
    for (int k = 0; k < d; ++k) {
      p(k) = axis[rem % n];
      rem /= n;
    }
    pts.push_back(p);
  }
  return pts;
}

//! ω(v) with v = (s, 0, …), s evenly spaced on [−max_slope, max_slope].
inline std::vector<Vec> direction_grid(int d, int n, double max_slope) {
  std::vector<Vec> dirs;
  for (int i = 0; i < n; ++i) {
    Vec v = Vec::Zero(d - 1);
    v(0) = n == 1 ? 0.0 : -max_slope + 2.0 * max_slope * i / (n - 1);
    dirs.push_back(OrbitChart::omega(v));
  }
  return dirs;
}

inline void report_rows(TsvTable& t, const Report& r) {
  for (const auto& [k, v] : r.values) t.row({r.name, k, cell(v)});
  t.row({r.name, "pass", cell(r.pass)});
  t.row({r.name, "inconclusive", cell(r.inconclusive)});
}

inline TsvTable report_table(const std::string& name) {
  return TsvTable(name, {{"check", "name"}, {"metric", "name"}, {"value", "as named"}});
}

inline std::string report_line(const Report& r) {
  std::string s = std::string(r.pass ? "PASS " : "FAIL ") + r.name + (r.inconclusive ? " (inconclusive)" : "");
  for (const auto& n : r.notes) s += " [" + n + "]";
  return s;
}

}  // namespace detail

// ---- group ----

inline RunOutput run_group_validate(const ExperimentConfig& cfg) {
  RunOutput out;
  const detail::Setup s = detail::make_setup(cfg);
  TsvTable t("group_validate", {{"property", "name"}, {"value", "as named"}});
  detail::snapshot(t, cfg, s);
  t.row({"closure_residual", cell(s.G.closure_residual())});
  t.row({"nilpotency_degree", cell(s.G.nilpotency_degree())});
  t.row({"lipschitz_C", cell(s.G.lipschitz_C())});
  t.row({"detection_valid", cell(s.G.detection_valid())});
  t.row({"r_sufficient", cell(r_sufficient(s.cone, s.W, s.G))});
  t.row({"box_certified", cell(box_certified(s.cone, s.W, s.G))});
  out.files["group_validate.tsv"] = t.str();
  out.summary.push_back(s.G.describe());
  if (!s.G.detection_valid()) {
    out.summary.push_back("detection constraints fail: " + s.G.detection_reason());
    out.status = 1;
  }
  return out;
}

inline RunOutput run_group_constants(const ExperimentConfig& cfg) {
  RunOutput out;
  const detail::Setup s = detail::make_setup(cfg);
  const ConstantsLedger L = compute_ledger(s.G, cfg.verify.N, cfg.verify.Nu, cfg.detect.eps_star);
  TsvTable t("constants_ledger", {{"constant", "name"}, {"value", "dimensionless"}});
  detail::snapshot(t, cfg, s);
  t.constant("N", cfg.verify.N);
  t.constant("Nu", cfg.verify.Nu);
  const std::vector<std::pair<std::string, double>> rows{
      {"alpha1", L.alpha1}, {"alpha2", L.alpha2}, {"ell1", L.ell1},     {"gamma0", L.gamma0},
      {"gamma1", L.gamma1}, {"gamma2", L.gamma2}, {"s0", L.s0},         {"s1", L.s1},
      {"s2", L.s2},         {"beta1", L.beta1},   {"beta2", L.beta2},   {"beta3", L.beta3},
      {"moment_bound", L.moment_bound}, {"required_moments", static_cast<double>(L.required_moments)},
      {"theta_nec", theta_necessary(shearlet_constants(s.G, cfg.detect.eps_star), cfg.verify.N)},
      {"theta_suf", theta_sufficient(shearlet_constants(s.G, cfg.detect.eps_star), cfg.verify.N)}};
  for (const auto& [k, v] : rows) t.row({k, cell(v)});
  out.files["constants.tsv"] = t.str();
  out.summary.push_back("required_moments(N=" + std::to_string(cfg.verify.N) + ", Nu=" + std::to_string(cfg.verify.Nu) +
                        ") = " + std::to_string(L.required_moments));
  return out;
}

// ---- wavelet ----

//! |ψ̂| on a frequency grid and ψ along the x₁ axis.
inline RunOutput run_wavelet_make(const ExperimentConfig& cfg, int n_grid = 65) {
  RunOutput out;
  const detail::Setup s = detail::make_setup(cfg);
  if (s.G.d() != 2) throw ConfigError(0, "wavelet make samples d = 2 wavelets only");
  const Wavelet w = make_wavelet(cfg.wavelet, cfg.window, 2);
  TsvTable f("wavelet_fourier", {{"xi1", "cycles/unit"}, {"xi2", "cycles/unit"}, {"re", "amplitude"},
                                 {"im", "amplitude"}, {"abs", "amplitude"}});
  detail::snapshot(f, cfg, s);
  f.constant("wavelet", w.id());
  const Vec box = w.fourier_box();
  for (int i = 0; i < n_grid; ++i)
    for (int j = 0; j < n_grid; ++j) {
      Vec xi(2);
      xi << -box(0) + 2 * box(0) * i / (n_grid - 1), -box(1) + 2 * box(1) * j / (n_grid - 1);
      const cplx v = w.fourier(xi);
      f.row({cell(xi(0)), cell(xi(1)), cell(v.real()), cell(v.imag()), cell(std::abs(v))});
    }
  TsvTable sp("wavelet_space_axis", {{"x1", "space"}, {"re", "amplitude"}, {"im", "amplitude"}});
  detail::snapshot(sp, cfg, s);
  sp.constant("wavelet", w.id());
  const double R = w.space_radius();
  for (int i = 0; i < n_grid; ++i) {
    Vec x(2);
    x << -R + 2 * R * i / (n_grid - 1), 0.0;
    const cplx v = w.space(x);
    sp.row({cell(x(0)), cell(v.real()), cell(v.imag())});
  }
  out.files["wavelet_fourier.tsv"] = f.str();
  out.files["wavelet_space.tsv"] = sp.str();
  out.summary.push_back(w.id());
  return out;
}

inline RunOutput run_wavelet_check(const ExperimentConfig& cfg, int r_check) {
  RunOutput out;
  const detail::Setup s = detail::make_setup(cfg);
  const Wavelet w = make_wavelet(cfg.wavelet, cfg.window, s.G.d());
  const int r = r_check > 0 ? r_check
                            : (w.kind == WaveletKind::moment_tensor ? cfg.wavelet.r : 20);
  const MomentCheck m = check_vanishing_moments(w, r);
  TsvTable t("wavelet_check", {{"property", "name"}, {"value", "as named"}});
  detail::snapshot(t, cfg, s);
  t.constant("wavelet", w.id());
  t.row({"moments_tested", cell(r)});
  t.row({"moments_pass", cell(m.pass)});
  t.row({"failed_order", cell(m.failed_order)});
  t.row({"max_residual", cell(m.residual)});
  bool ok = m.pass;
  if (s.G.d() == 2) {
    const AdmissibilityResult a = admissibility_constant(w, s.G, Vec::Unit(2, 0));
    t.row({"C_psi", cell(a.value)});
    t.row({"C_psi_refinement_change", cell(a.refinement_change)});
    t.row({"C_psi_extension_change", cell(a.extension_change)});
    t.row({"C_psi_converged", cell(a.converged)});
    ok = ok && a.converged;
  }
  out.files["wavelet_check.tsv"] = t.str();
  out.summary.push_back(w.id() + (m.pass ? ": " + std::to_string(r) + " vanishing moments"
                                         : ": moment of order " + std::to_string(m.failed_order) + " is nonzero"));
  out.status = ok ? 0 : 1;
  return out;
}

// ---- transform ----

struct TransformRequest {
  std::vector<Vec> points;
  std::vector<GroupElement> dilations;
  bool raw = false;
};

inline RunOutput run_transform(const ExperimentConfig& cfg, const TransformRequest& req) {
  RunOutput out;
  const detail::Setup s = detail::make_setup(cfg);
  const int d = s.G.d();
  const Wavelet w = make_wavelet(cfg.wavelet, cfg.window, d);
  const Distribution u = make_signal(cfg.signal, d);
  TransformEngine eng(s.G);
  const CoefficientField f = coefficient_field(eng, u, w, req.points, req.dilations);
  std::vector<Column> cols;
  for (int k = 0; k < d; ++k) cols.push_back({"x" + std::to_string(k + 1), "space"});
  for (int k = 0; k < d - 1; ++k) cols.push_back({"t" + std::to_string(k + 2), "shear"});
  for (auto c : std::vector<Column>{{"a", "scale"}, {"abs", "coefficient"}, {"re", "coefficient"},
                                    {"im", "coefficient"}, {"flagged", "bool"}})
    cols.push_back(c);
  TsvTable t("transform", cols);
  detail::snapshot(t, cfg, s);
  t.constant("wavelet", w.id());
  t.constant("signal", u.id());
  std::vector<double> raw;
  int flagged = 0;
  for (std::size_t i = 0; i < req.points.size(); ++i)
    for (std::size_t j = 0; j < req.dilations.size(); ++j) {
      const cplx v = f.values(i, j);
      std::vector<std::string> row;
      for (int k = 0; k < d; ++k) row.push_back(cell(req.points[i](k)));
      for (int k = 0; k < d - 1; ++k) row.push_back(cell(req.dilations[j].t(k)));
      row.push_back(cell(req.dilations[j].a));
      row.push_back(cell(std::abs(v)));
      row.push_back(cell(v.real()));
      row.push_back(cell(v.imag()));
      row.push_back(cell(static_cast<bool>(f.flags(i, j))));
      t.row(row);
      raw.push_back(v.real());
      raw.push_back(v.imag());
      flagged += f.flags(i, j);
    }
  out.files["transform.tsv"] = t.str();
  if (req.raw)
    out.files["transform.raw"] = raw_dump({static_cast<std::int64_t>(req.points.size()),
                                           static_cast<std::int64_t>(req.dilations.size()), 2},
                                          raw);
  out.summary.push_back(std::to_string(req.points.size() * req.dilations.size()) + " coefficients, " +
                        std::to_string(flagged) + " flagged");
  return out;
}

// ---- detect ----

/**
 * @brief Wavefront map over the configured grids.
 *
 * Exit status 1 when a verdict contradicts the ground truth of the synthetic signal.
 */
inline RunOutput run_detect(const ExperimentConfig& cfg) {
  RunOutput out;
  const detail::Setup s = detail::make_setup(cfg);
  const int d = s.G.d();
  const DetectConfig& dc = cfg.detect;
  const Wavelet w = make_wavelet(cfg.wavelet, cfg.window, d);
  const Distribution u = make_signal(cfg.signal, d);
  TransformEngine eng(s.G);
  LadderOptions lo;
  lo.n_scales = dc.n_scales;
  lo.a_start = dc.a_start;
  lo.ratio = dc.ratio;
  ConeSpec cone = s.cone;
  cone.sign = +1;
  const DilationLadder ladder = build_ladder(s.G, cone, s.W, dc.mode, lo);
  if (static_cast<int>(ladder.elements.size()) < kMinScales)
    throw Error(ErrorCode::precondition, "only " + std::to_string(ladder.elements.size()) +
                                             " ladder scales pass the membership test; need " +
                                             std::to_string(kMinScales));
  WavefrontMapOptions opt;
  opt.orders = dc.N;
  opt.decay.y_radius = dc.y_radius;
  opt.decay.n_y = dc.n_y;
  const DetectionConstants K = shearlet_constants(s.G, dc.eps_star);
  const std::vector<Vec> points = detail::point_grid(d, dc.grid, dc.grid_extent);
  const std::vector<Vec> dirs = detail::direction_grid(d, dc.directions, dc.max_slope);
  const WavefrontMap map = wavefront_map(eng, u, w, ladder, points, dirs, opt, K);

  std::vector<Column> cols;
  for (int k = 0; k < d; ++k) cols.push_back({"x" + std::to_string(k + 1), "space"});
  for (int k = 0; k < d; ++k) cols.push_back({"xi" + std::to_string(k + 1), "unit direction"});
  for (auto c : std::vector<Column>{{"class", "signed|unsigned"}, {"N", "order"}, {"exponent", "log|W|/log|h|"},
                                    {"residual", "log units"}, {"theta_nec", "exponent"},
                                    {"theta_suf", "exponent"}, {"verdict", "label"}, {"truth", "label"},
                                    {"contradiction", "bool"}})
    cols.push_back(c);
  TsvTable t("verdicts", cols);
  detail::snapshot(t, cfg, s);
  t.constant("wavelet", w.id());
  t.constant("signal", u.id());
  t.constant("ladder_mode", to_string(dc.mode));
  t.constant("ladder_a_start", ladder.elements.front().a);
  t.constant("ladder_scales", static_cast<double>(ladder.elements.size()));
  t.constant("n_y", dc.n_y);
  t.constant("y_radius", dc.y_radius);
  int singular = 0, regular = 0, inconclusive = 0, skipped = 0, contradictions = 0;
  for (const WavefrontCell& c : map.cells) {
    const Vec& x = points[c.point];
    const Vec& xi = dirs[c.direction];
    auto base = [&] {
      std::vector<std::string> r;
      for (int k = 0; k < d; ++k) r.push_back(cell(x(k)));
      for (int k = 0; k < d; ++k) r.push_back(cell(xi(k)));
      r.push_back(c.unsigned_class ? "unsigned" : "signed");
      return r;
    };
    if (c.out_of_orbit) {
      ++skipped;
      auto r = base();
      for (auto v : {"-", "-", "-", "-", "-", "-", "out_of_orbit", "-", "0"}) r.push_back(v);
      t.row(r);
      continue;
    }
    for (std::size_t k = 0; k < c.verdicts.size(); ++k) {
      const Verdict& v = c.verdicts[k];
      std::string truth = "unknown";
      bool bad = false;
      if (u.truth_known()) {
        const bool reg = u.truth_regular(x, xi, v.N);
        truth = reg ? "regular" : "singular";
        bad = (v.kind == VerdictKind::singular && reg) || (v.kind == VerdictKind::regular && !reg);
      }
      singular += v.kind == VerdictKind::singular;
      regular += v.kind == VerdictKind::regular;
      inconclusive += v.kind == VerdictKind::inconclusive;
      contradictions += bad;
      auto r = base();
      r.push_back(cell(v.N));
      r.push_back(c.estimate.all_zero ? "inf" : cell(c.estimate.exponent));
      r.push_back(cell(c.estimate.residual));
      r.push_back(cell(v.theta_nec));
      r.push_back(cell(v.theta_suf));
      r.push_back(to_string(v.kind));
      r.push_back(truth);
      r.push_back(cell(bad));
      t.row(r);
    }
    TsvTable ll("loglog", {{"log_norm", "log ||h||"}, {"log_coef", "log max|W|"}});
    detail::snapshot(ll, cfg, s);
    ll.constant("point", "[" + detail::join(x) + "]");
    ll.constant("direction", "[" + detail::join(xi) + "]");
    ll.constant("exponent", c.estimate.exponent);
    for (std::size_t j = 0; j < c.estimate.log_norm.size(); ++j)
      ll.row({cell(c.estimate.log_norm[j]), cell(c.estimate.log_coef[j])});
    out.files["loglog/cell_p" + std::to_string(c.point) + "_d" + std::to_string(c.direction) + ".tsv"] = ll.str();
  }
  out.files["verdicts.tsv"] = t.str();
  out.summary.push_back("singular=" + std::to_string(singular) + " regular=" + std::to_string(regular) +
                        " inconclusive=" + std::to_string(inconclusive) + " out_of_orbit=" + std::to_string(skipped) +
                        " contradictions=" + std::to_string(contradictions));
  out.status = contradictions ? 1 : 0;
  return out;
}

// ---- verify ----

inline const std::vector<std::string>& verify_suites() {
  static const std::vector<std::string> s{"constants", "norms", "overlap", "convolution", "crosskernel", "transfer"};
  return s;
}

/**
 * @brief One verifier suite; every report becomes rows of `verify_<suite>.tsv`.
 *
 * The convolution and transfer suites run on the 2D standard group with their own
 * demonstration windows, recorded in the table constants.
 */
inline RunOutput run_verify(const ExperimentConfig& cfg, const std::string& suite, std::uint64_t seed) {
  RunOutput out;
  const detail::Setup s = detail::make_setup(cfg);
  TsvTable t = detail::report_table("verify_" + suite);
  detail::snapshot(t, cfg, s);
  t.constant("suite", suite);
  t.constant("suite_seed", static_cast<double>(seed));
  std::vector<Report> reps;
  auto need2d = [&] {
    if (s.G.d() != 2) throw ConfigError(0, "suite " + suite + " runs on d = 2 groups only");
  };
  if (suite == "constants") {
    const ConstantsLedger L = compute_ledger(s.G, cfg.verify.N, cfg.verify.Nu, cfg.detect.eps_star);
    Report r;
    r.name = "ledger";
    for (const auto& [k, v] : std::vector<std::pair<std::string, double>>{
             {"alpha1", L.alpha1}, {"alpha2", L.alpha2}, {"ell1", L.ell1}, {"gamma0", L.gamma0},
             {"gamma1", L.gamma1}, {"gamma2", L.gamma2}, {"s0", L.s0}, {"s1", L.s1}, {"s2", L.s2},
             {"beta1", L.beta1}, {"beta2", L.beta2}, {"beta3", L.beta3},
             {"required_moments", static_cast<double>(L.required_moments)},
             {"assertions", static_cast<double>(L.assertions.size())}})
      r.set(k, v);
    reps.push_back(r);
    reps.push_back(check_gamma_factors());
  } else if (suite == "norms") {
    const int n = cfg.verify.samples;
    reps.push_back(check_group_axioms(s.G, std::min(n, 1000), seed));
    reps.push_back(check_AH_inequality(s.G, s.G.nilpotency_degree() + 1, n, seed));
    reps.push_back(check_cone_sandwich(s.G, s.cone, s.W, n, seed));
    reps.push_back(check_norm_lemma(s.G, s.cone, s.W, n, seed));
  } else if (suite == "overlap") {
    need2d();
    reps.push_back(check_overlap_control(s.G, s.cone, s.W, cfg.verify.L, cfg.verify.n_h));
  } else if (suite == "convolution") {
    need2d();
    const FrequencyWindow W{0.5, 2.0, 0.5};
    t.constant("demo_window", "0.5,2,0.5");
    TransformEngine eng(s.G);
    const Wavelet psi = make_bandlimited(W, false);
    const AdmissibilityResult ad = admissibility_constant(psi, s.G, Vec::Unit(2, 0));
    ConvolutionGrid g;
    Vec x1 = Vec::Zero(2), x2(2);
    x2 << 0.15, -0.1;
    g.x_targets = {x1, x2};
    g.h_targets = {s.G.identity(), s.G.element(Vec::Constant(1, 0.25), 0.7)};
    reps.push_back(check_convolution_identity(eng, make_gaussian(Vec::Zero(2), 0.3), psi, psi, g, ad.value));
  } else if (suite == "crosskernel") {
    need2d();
    CrossKernelOptions o;
    o.seed = seed;
    const Wavelet psi = make_bandlimited(s.W, false);
    reps.push_back(check_cross_kernel_decay(s.G, psi, psi, 2, 2, 2, std::min(cfg.verify.samples, 1000), o));
  } else if (suite == "transfer") {
    need2d();
    const FrequencyWindow W = s.W;
    const ConeSpec cone{s.cone.eps, 7.0, +1};
    t.constant("demo_cone_R", 7.0);
    TransformEngine eng(s.G);
    const Wavelet band = make_bandlimited(W, false);
    const Wavelet mom = make_moment_wavelet(required_moments(s.G, cfg.verify.N, 0), Core::gaussian, 1.0);
    std::vector<double> sc;
    for (int j = 3; j <= 12; ++j) sc.push_back(std::ldexp(1.0, -j));
    const Vec zero = Vec::Zero(1), x = Vec::Zero(2);
    const DilationLadder Ki = explicit_ladder(s.G, cone, W, LadderMode::exact_Ki, sc, zero);
    const DilationLadder Ko = explicit_ladder(s.G, cone, W, LadderMode::exact_Ko, sc, zero);
    DecayOptions o;
    o.n_y = 5;
    for (const Distribution& u : {make_point_delta(x), make_line_delta(2), make_halfspace(2), make_gaussian(x, 0.3)}) {
      Report r = check_transfer(eng, u, band, mom, x, Ki, Ko, cfg.verify.N, 0, o);
      r.name = std::string("transfer_") + to_string(u.kind);
      reps.push_back(r);
    }
  } else {
    throw ConfigError(0, "unknown suite '" + suite + "'");
  }
  bool ok = true;
  for (const Report& r : reps) {
    detail::report_rows(t, r);
    out.summary.push_back(detail::report_line(r));
    ok = ok && r.pass;
  }
  out.files["verify_" + suite + ".tsv"] = t.str();
  out.status = ok ? 0 : 1;
  return out;
}

}  // namespace wfset
