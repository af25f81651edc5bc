// Acceptance criteria: one PASS/FAIL line per criterion, tolerances and time limits pinned.

#include <wfset/verifier.hpp>

#include <chrono>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>

using namespace wfset;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += " FAILED(" + what + ")";
    }
  }
  void note(const std::string& s) { detail += " " + s; }
};

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

Vec vec1(double a) { return Vec::Constant(1, a); }
Vec vec2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

ShearletGroup standard2() { return ShearletGroup(standard_basis(vec1(0.5))); }

int run(int id, const std::string& title, double limit_s, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o.pass = false;
    o.detail += std::string(" EXCEPTION(") + e.what() + ")";
  }
  const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  o.require(sec < limit_s, "runtime " + fmt(sec) + "s >= " + fmt(limit_s) + "s");
  std::printf("[%s] criterion %d: %s |%s | time=%.2fs limit=%.0fs\n", o.pass ? "PASS" : "FAIL", id, title.c_str(),
              o.detail.c_str(), sec, limit_s);
  std::fflush(stdout);
  return o.pass ? 0 : 1;
}

bool close(double a, double b, double tol = 1e-12) { return std::abs(a - b) <= tol * std::max(1.0, std::abs(b)); }

}  // namespace

int main() {
  int failures = 0;

  failures += run(1, "group algebra on 1000 triples per group (residual < 1e-10)", 5.0, [] {
    Outcome o;
    const ShearletGroup specs[] = {standard2(), ShearletGroup(standard_basis(vec2(0.5, 0.5))),
                                   ShearletGroup(toeplitz_basis(3, 1.0 / 3.0))};
    const char* names[] = {"std2", "std3", "toep3"};
    for (int i = 0; i < 3; ++i) {
      const Report r = check_group_axioms(specs[i], 1000);
      const double worst = std::max({r.get("associativity"), r.get("inverse"), r.get("inverse_coordinates")});
      o.note(std::string(names[i]) + ":max_residual=" + fmt(worst));
      o.require(r.get("associativity") < 1e-10, std::string(names[i]) + " associativity");
      o.require(r.get("inverse") < 1e-10, std::string(names[i]) + " inverse");
      o.require(r.get("inverse_coordinates") < 1e-10, std::string(names[i]) + " inverse coordinates");
      o.require(r.pass, std::string(names[i]) + " report");
    }
    return o;
  });

  failures += run(2, "left Haar invariance, 3 functions x 5 translations, spacing 1/64 (rel < 1e-3)", 30.0, [] {
    Outcome o;
    const Report r = check_haar_invariance(standard2(), 5, 1.0 / 64.0);
    o.note("max_rel_dev=" + fmt(r.get("max_relative_deviation")));
    o.require(r.get("max_relative_deviation") < 1e-3, "relative deviation");
    return o;
  });

  failures += run(3, "cone sandwich, 1e4 samples, R=10 (zero violations)", 20.0, [] {
    Outcome o;
    const ShearletGroup G = standard2();
    const FrequencyWindow W{0.9, 1.1, 0.1};
    const ConeSpec C{0.1, 10.0, +1};
    const Report r = check_cone_sandwich(G, C, W, 10000);
    o.note("r_suff=" + fmt(r.get("r_sufficient")) + " a0=" + fmt(r.get("a0")) + " d0=" + fmt(r.get("delta0")) +
           " a1=" + fmt(r.get("a1")) + " d1=" + fmt(r.get("delta1")));
    const int v = static_cast<int>(r.get("inner_not_Ki") + r.get("Ki_not_Ko") + r.get("Ko_not_outer"));
    o.note("violations=" + std::to_string(v) + " inner_members=" + fmt(r.get("inner_box_members")));
    o.require(close(r.get("r_sufficient"), 8.8), "r_sufficient = 8.8");
    o.require(close(r.get("a0"), 0.09) && close(r.get("delta0"), 0.1 / 3.0), "(a0, delta0) = (0.09, 1/30)");
    o.require(close(r.get("a1"), 0.22) && close(r.get("delta1"), 0.3), "(a1, delta1) = (0.22, 0.3)");
    o.require(v == 0, "inclusion chain");
    o.require(r.get("inner_box_members") > 0, "non-vacuous inner box");
    return o;
  });

  failures += run(4, "||h^{+-1}|| A_H(h)^3 <= 1 over 1e5 samples (zero violations)", 10.0, [] {
    Outcome o;
    const Report r = check_AH_inequality(standard2(), 3.0, 100000);
    o.note("max_product=" + fmt(r.get("max_product")) + " violations=" + fmt(r.get("violations")));
    o.require(r.get("violations") == 0, "violations");
    return o;
  });

  failures += run(5, "constants ledger, 2D standard (exact match)", 5.0, [] {
    Outcome o;
    const ConstantsLedger L = compute_ledger(standard2(), 2, 0);
    o.note("alpha1=" + fmt(L.alpha1) + " ell1=" + fmt(L.ell1) + " gamma=(" + fmt(L.gamma0) + "," + fmt(L.gamma1) + "," +
           fmt(L.gamma2) + ") s=(" + fmt(L.s0) + "," + fmt(L.s1) + "," + fmt(L.s2) +
           ") r=" + std::to_string(L.required_moments));
    o.require(close(L.alpha1, 2) && close(L.ell1, 3), "alpha1, ell1");
    o.require(close(L.gamma0, 5) && close(L.gamma1, 1) && close(L.gamma2, 0.5), "gamma");
    o.require(close(L.s0, 87) && close(L.s1, 8.5) && close(L.s2, 27), "s-values");
    o.require(L.required_moments == 105, "required_moments(2, 0) = 105");
    return o;
  });

  failures += run(6, "decay exponents vs closed-form oracles (+-0.05; gaussian > 6)", 120.0, [] {
    Outcome o;
    const ShearletGroup G = standard2();
    const TransformEngine eng(G);
    const FrequencyWindow W{0.9, 1.1, 0.1};
    const ConeSpec C{0.1, 7.0, +1};
    std::vector<double> sc;
    for (int j = 3; j <= 12; ++j) sc.push_back(std::ldexp(1.0, -j));
    const DilationLadder L = explicit_ladder(G, C, W, LadderMode::exact_Ki, sc, vec1(0.0));
    const Wavelet wavelets[] = {make_bandlimited(W, false), make_moment_wavelet(4, Core::gaussian, 1.0)};
    const char* wname[] = {"band", "mom4"};
    DecayOptions opt;
    opt.n_y = 1;  // the oracles are stated at the singular point itself
    const Vec x = Vec::Zero(2);
    struct Oracle {
      Distribution u;
      double value;
      const char* name;
    };
    const Oracle oracles[] = {{make_point_delta(x), -1.5, "point"},
                              {make_line_delta(2), -0.5, "line"},
                              {make_halfspace(2), 1.5, "edge"}};
    for (int k = 0; k < 2; ++k) {
      for (const Oracle& q : oracles) {
        const DecayEstimate e = estimate_decay(eng, q.u, wavelets[k], x, L, opt);
        o.note(std::string(wname[k]) + ":" + q.name + "=" + fmt(e.exponent));
        o.require(std::abs(e.exponent - q.value) <= 0.05, std::string(wname[k]) + " " + q.name);
        o.require(!e.quad_flagged, std::string(wname[k]) + " " + q.name + " quadrature flag");
      }
      // gaussian: every (point, direction) cell of a 3x3 sample
      double worst = inf;
      const Distribution g = make_gaussian(x, 0.3);
      for (const Vec& p : {x, vec2(0.2, -0.1), vec2(-0.15, 0.25)})
        for (double v : {-0.5, 0.0, 0.5}) {
          const GroupElement s = steering_element(G, OrbitChart::omega(vec1(v)));
          const DecayEstimate e = estimate_decay(eng, g, wavelets[k], p, L, opt, &s);
          worst = std::min(worst, e.all_zero ? inf : e.exponent);
          o.require(!e.quad_flagged, std::string(wname[k]) + " gaussian quadrature flag");
        }
      o.note(std::string(wname[k]) + ":gauss_min=" + fmt(worst));
      o.require(worst > 6.0, std::string(wname[k]) + " gaussian exponent > 6");
    }
    return o;
  });

  failures += run(7, "wavefront_map soundness at N=1..4 on four distributions; line localization", 300.0, [] {
    Outcome o;
    const ShearletGroup G = standard2();
    const TransformEngine eng(G);
    const FrequencyWindow W{0.9, 1.1, 0.1};
    const ConeSpec C{0.1, 800.0, +1};
    LadderOptions lo;
    lo.n_scales = 10;
    lo.a_start = std::ldexp(1.0, -14);
    const DilationLadder L = build_ladder(G, C, W, LadderMode::exact_Ki, lo);
    o.require(L.elements.size() == 10, "ladder size");
    const Wavelet psi = make_bandlimited(W, false);
    std::vector<Vec> pts;
    for (double x1 : {-0.2, -0.1, 0.0, 0.1, 0.2})
      for (double x2 : {-0.1, 0.0, 0.1}) pts.push_back(vec2(x1, x2));
    std::vector<Vec> dirs;
    for (double v : {-1.0, -0.5, -0.2, 0.0, 0.2, 0.5, 1.0, 12.0}) dirs.push_back(OrbitChart::omega(vec1(v)));
    WavefrontMapOptions opt;
    opt.orders = {1, 2, 3, 4};
    const DetectionConstants K = shearlet_constants(G);
    const Vec z = Vec::Zero(2);
    int total_bad = 0;
    for (const Distribution& u : {make_point_delta(z), make_line_delta(2), make_halfspace(2), make_gaussian(z, 0.3)}) {
      const WavefrontMap m = wavefront_map(eng, u, psi, L, pts, dirs, opt, K);
      int sing = 0, reg = 0, inc = 0, bad = 0, outside_class = 0;
      for (const WavefrontCell& c : m.cells) {
        if (c.out_of_orbit) continue;
        for (std::size_t k = 0; k < c.verdicts.size(); ++k) {
          const bool truth = u.truth_regular(pts[c.point], dirs[c.direction], opt.orders[k]);
          const VerdictKind v = c.verdicts[k].kind;
          sing += v == VerdictKind::singular;
          reg += v == VerdictKind::regular;
          inc += v == VerdictKind::inconclusive;
          bad += (v == VerdictKind::singular && truth) || (v == VerdictKind::regular && !truth);
          if (u.kind == DistKind::line_delta && v == VerdictKind::singular) {
            const bool on_line = std::abs(pts[c.point](0)) < 1e-12;
            const bool normal = std::abs(dirs[c.direction](1)) < 1e-12;
            outside_class += !(on_line && normal);
          }
        }
      }
      o.note(std::string(to_string(u.kind)) + ":S/R/I/bad=" + std::to_string(sing) + "/" + std::to_string(reg) + "/" +
             std::to_string(inc) + "/" + std::to_string(bad));
      total_bad += bad;
      if (u.kind == DistKind::line_delta) {
        o.require(sing > 0, "line_delta has singular cells");
        o.require(outside_class == 0, "line_delta singular cells lie on the line with direction +-e1");
      }
      if (u.kind == DistKind::gaussian) o.require(sing == 0, "gaussian has no singular cells");
    }
    o.require(total_bad == 0, "verdicts never contradict ground truth");
    return o;
  });

  failures += run(8, "convolution identity (max rel dev < 10%; half-space variant agrees)", 600.0, [] {
    Outcome o;
    const ShearletGroup G = standard2();
    const TransformEngine eng(G);
    const FrequencyWindow W{0.5, 2.0, 0.5};
    const Distribution u = make_gaussian(Vec::Zero(2), 0.3);
    ConvolutionGrid grid;
    grid.x_targets = {Vec::Zero(2), vec2(0.15, -0.1)};
    grid.h_targets = {G.identity(), G.element(vec1(0.25), 0.7)};
    // complex psi: spectrum of F·K lies in V − V, so dy = 0.5 is alias-free
    {
      const Wavelet psi = make_bandlimited(W, false);
      const double C = admissibility_constant(psi, G, Vec::Unit(2, 0)).value;
      grid.dy = 0.5;
      const Report r = check_convolution_identity(eng, u, psi, psi, grid, C, nullptr, 8);
      o.note("complex:dev=" + fmt(r.get("max_dev_full")) + " boundary=" + fmt(r.get("max_boundary_share")));
      o.require(r.get("max_dev_full") < 0.1, "complex identity");
      o.require(!r.inconclusive, "complex boundary share");
    }
    // real psi: V + V also appears, so the y-lattice is halved
    {
      const Wavelet psi = make_bandlimited(W, true);
      const double C = admissibility_constant(psi, G, Vec::Unit(2, 0)).value;
      grid.dy = 0.25;
      const Report r = check_convolution_identity(eng, u, psi, psi, grid, C, nullptr, 6);
      o.note("real:dev=" + fmt(r.get("max_dev_full")) + " half_vs_full=" + fmt(r.get("max_dev_between")) +
             " boundary=" + fmt(r.get("max_boundary_share")));
      o.require(r.get("max_dev_full") < 0.1, "real identity");
      o.require(r.get("max_dev_between") < 0.1, "half-space variant");
      o.require(!r.inconclusive, "real boundary share");
    }
    return o;
  });

  failures += run(9, "transfer: exp(moment, K_o) >= min(exp(band, K_i), N) - 0.2 at N=2", 180.0, [] {
    Outcome o;
    const ShearletGroup G = standard2();
    const TransformEngine eng(G);
    const FrequencyWindow W{0.9, 1.1, 0.1};
    const ConeSpec C{0.1, 7.0, +1};
    std::vector<double> sc;
    for (int j = 3; j <= 12; ++j) sc.push_back(std::ldexp(1.0, -j));
    const DilationLadder Ki = explicit_ladder(G, C, W, LadderMode::exact_Ki, sc, vec1(0.0));
    const DilationLadder Ko = explicit_ladder(G, C, W, LadderMode::exact_Ko, sc, vec1(0.0));
    const Wavelet band = make_bandlimited(W, false);
    const Wavelet mom = make_moment_wavelet(required_moments(G, 2, 0), Core::gaussian, 1.0);
    const Vec x = Vec::Zero(2);
    for (const Distribution& u : {make_point_delta(x), make_line_delta(2), make_halfspace(2), make_gaussian(x, 0.3)}) {
      TransferResult tr;
      const Report r = check_transfer(eng, u, band, mom, x, Ki, Ko, 2, 0, {}, &tr);
      o.note(std::string(to_string(u.kind)) + ":band=" + fmt(tr.band.exponent) + ",mom=" + fmt(tr.moment.exponent));
      o.require(r.pass, std::string(to_string(u.kind)) + " transfer");
    }
    return o;
  });

  failures += run(10, "overlap control, L in {0,1,2}, 6-point ladder (ratio spread < 10)", 300.0, [] {
    Outcome o;
    const ShearletGroup G = standard2();
    const FrequencyWindow W{0.9, 1.1, 0.1};
    const ConeSpec C{0.1, 10.0, +1};
    std::vector<OverlapRow> rows;
    const Report r = check_overlap_control(G, C, W, {0.0, 1.0, 2.0}, 6, &rows);
    for (const OverlapRow& row : rows) {
      o.note("L" + fmt(row.L) + ":s=" + fmt(row.s) + ",t=" + fmt(row.t) + ",spread=" + fmt(row.spread));
      o.require(row.spread < 10.0, "spread at L=" + fmt(row.L));
      o.require(row.norms.size() == 6, "ladder length");
    }
    o.require(rows.size() == 3, "three rows");
    return o;
  });

  std::printf("%d of 10 criteria failed\n", failures);
  return failures ? 1 : 0;
}
