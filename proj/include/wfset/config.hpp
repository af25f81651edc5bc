#pragma once

#include "verifier.hpp"

#include <cctype>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace wfset {

/**
 * @brief Parse or validation failure; `line` is 1-based, 0 when not tied to a line.
 */
class ConfigError : public Error {
 public:
  ConfigError(int line, const std::string& what)
      : Error(ErrorCode::config, (line ? "line " + std::to_string(line) + ": " : std::string()) + what),
        line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

// ---- INI-style document ----

struct IniValue {
  std::string raw;
  int line = 0;
};

//! Sections keep insertion order of keys so error reports are stable.
struct IniSection {
  std::string name;
  int line = 0;
  std::vector<std::pair<std::string, IniValue>> entries;

  const IniValue* find(const std::string& key) const {
    for (const auto& e : entries)
      if (e.first == key) return &e.second;
    return nullptr;
  }
};

struct IniDocument {
  std::vector<IniSection> sections;
  const IniSection* find(const std::string& name) const {
    for (const auto& s : sections)
      if (s.name == name) return &s;
    return nullptr;
  }
};

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

inline std::string strip_comment(const std::string& s) {
  bool in_quotes = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"') in_quotes = !in_quotes;
    if (!in_quotes && (s[i] == '#' || s[i] == ';')) return s.substr(0, i);
  }
  return s;
}

inline bool valid_identifier(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_')) return false;
  return true;
}

}  // namespace detail

/**
 * @brief `[section]` headers, `key = value` lines, `#`/`;` comments.
 *
 * Keys before the first header, duplicate sections and duplicate keys are errors.
 */
inline IniDocument parse_ini(const std::string& text) {
  IniDocument doc;
  std::istringstream in(text);
  std::string line;
  int n = 0;
  std::set<std::string> seen;
  while (std::getline(in, line)) {
    ++n;
    const std::string s = detail::trim(detail::strip_comment(line));
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') throw ConfigError(n, "unterminated section header");
      const std::string name = detail::trim(s.substr(1, s.size() - 2));
      if (!detail::valid_identifier(name)) throw ConfigError(n, "invalid section name '" + name + "'");
      if (!seen.insert(name).second) throw ConfigError(n, "duplicate section [" + name + "]");
      doc.sections.push_back({name, n, {}});
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError(n, "expected 'key = value'");
    if (doc.sections.empty()) throw ConfigError(n, "key outside of any section");
    const std::string key = detail::trim(s.substr(0, eq));
    const std::string value = detail::trim(s.substr(eq + 1));
    if (!detail::valid_identifier(key)) throw ConfigError(n, "invalid key '" + key + "'");
    if (value.empty()) throw ConfigError(n, "empty value for '" + key + "'");
    IniSection& sec = doc.sections.back();
    if (sec.find(key)) throw ConfigError(n, "duplicate key '" + key + "' in [" + sec.name + "]");
    sec.entries.push_back({key, {value, n}});
  }
  return doc;
}

// ---- typed values ----

namespace detail {

inline double parse_number(const IniValue& v, const std::string& key) {
  const std::string s = trim(v.raw);
  std::size_t used = 0;
  double x = 0.0;
  try {
    x = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  // Rationals such as 1/3 are accepted for exponents.
  if (used && used < s.size() && s[used] == '/') {
    const std::string den = s.substr(used + 1);
    std::size_t used2 = 0;
    double y = 0.0;
    try {
      y = std::stod(den, &used2);
    } catch (const std::exception&) {
      used2 = 0;
    }
    if (used2 != den.size() || y == 0.0) throw ConfigError(v.line, "'" + key + "' is not a number: " + s);
    return x / y;
  }
  if (used != s.size() || !std::isfinite(x)) throw ConfigError(v.line, "'" + key + "' is not a number: " + s);
  return x;
}

inline IniValue element(const IniValue& v, const std::string& s) { return {s, v.line}; }

inline std::vector<double> parse_list(const IniValue& v, const std::string& key) {
  const std::string s = trim(v.raw);
  if (s.size() < 2 || s.front() != '[' || s.back() != ']')
    throw ConfigError(v.line, "'" + key + "' must be a list like [a, b]");
  const std::string body = trim(s.substr(1, s.size() - 2));
  std::vector<double> out;
  if (body.empty()) return out;
  std::stringstream ss(body);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) throw ConfigError(v.line, "empty entry in list '" + key + "'");
    out.push_back(parse_number(element(v, item), key));
  }
  return out;
}

inline bool parse_bool(const IniValue& v, const std::string& key) {
  const std::string s = trim(v.raw);
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw ConfigError(v.line, "'" + key + "' must be true or false");
}

inline std::string parse_string(const IniValue& v) {
  std::string s = trim(v.raw);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return s;
}

inline int parse_int(const IniValue& v, const std::string& key) {
  const double x = parse_number(v, key);
  if (x != std::floor(x) || std::abs(x) > 1e9) throw ConfigError(v.line, "'" + key + "' must be an integer");
  return static_cast<int>(x);
}

//! Reads keys from one section and rejects anything not consumed.
class SectionReader {
 public:
  SectionReader(const IniDocument& doc, const std::string& name, std::set<std::string> allowed)
      : sec_(doc.find(name)), name_(name), allowed_(std::move(allowed)) {
    if (!sec_) return;
    for (const auto& e : sec_->entries)
      if (!allowed_.count(e.first))
        throw ConfigError(e.second.line, "unknown key '" + e.first + "' in [" + name_ + "]");
  }
  bool present() const { return sec_ != nullptr; }
  const IniValue* get(const std::string& key) const { return sec_ ? sec_->find(key) : nullptr; }
  int line_of(const std::string& key) const {
    const IniValue* v = get(key);
    return v ? v->line : (sec_ ? sec_->line : 0);
  }
  double number(const std::string& key, double def) const {
    const IniValue* v = get(key);
    return v ? parse_number(*v, key) : def;
  }
  int integer(const std::string& key, int def) const {
    const IniValue* v = get(key);
    return v ? parse_int(*v, key) : def;
  }
  bool boolean(const std::string& key, bool def) const {
    const IniValue* v = get(key);
    return v ? parse_bool(*v, key) : def;
  }
  std::string string(const std::string& key, const std::string& def) const {
    const IniValue* v = get(key);
    return v ? parse_string(*v) : def;
  }
  std::optional<std::vector<double>> list(const std::string& key) const {
    const IniValue* v = get(key);
    if (!v) return std::nullopt;
    return parse_list(*v, key);
  }
  void require(bool ok, const std::string& key, const std::string& inequality) const {
    if (!ok) throw ConfigError(line_of(key), "[" + name_ + "] " + key + ": constraint " + inequality + " violated");
  }

 private:
  const IniSection* sec_;
  std::string name_;
  std::set<std::string> allowed_;
};

}  // namespace detail

// ---- experiment configuration ----

struct GroupConfig {
  Family family = Family::standard;
  int d = 2;
  std::vector<double> lambda{0.5};
  double delta = 0.5;
  std::vector<std::vector<double>> basis;  // custom: row-major X₂…X_d
};

struct ConeConfig {
  double eps = 0.1;
  bool R_auto = false;
  double R = 10.0;
  int sign = +1;
};

struct WaveletConfig {
  WaveletKind kind = WaveletKind::bandlimited;
  bool mirrored = false;
  int r = 4;
  Core core = Core::gaussian;
  double support_radius = 1.0;
};

struct SignalConfig {
  DistKind kind = DistKind::point_delta;
  std::vector<double> x0;      // point_delta; defaults to the origin
  double offset = 0.0;         // line, halfspace
  std::vector<double> center;  // gaussian
  double width = 0.3;
};

struct DetectConfig {
  std::vector<int> N{1, 2, 3, 4};
  int n_scales = 10;
  double a_start = 0.0;  // 0 selects the ladder default
  double ratio = 0.5;
  LadderMode mode = LadderMode::exact_Ki;
  int grid = 5;            // points per axis
  double grid_extent = 0.2;
  int directions = 7;
  double max_slope = 1.0;  // directions ω(v) with |v| ≤ max_slope
  double y_radius = 0.01;
  int n_y = 5;
  double eps_star = 0.01;
};

struct VerifyConfig {
  int samples = 10000;
  int N = 2;
  int Nu = 0;
  int n_h = 6;
  std::vector<double> L{0, 1, 2};
};

struct ExperimentConfig {
  GroupConfig group;
  FrequencyWindow window;
  ConeConfig cone;
  WaveletConfig wavelet;
  SignalConfig signal;
  DetectConfig detect;
  VerifyConfig verify;
  std::string output_dir = ".";
  std::uint64_t seed = 1;
};

namespace detail {

inline void parse_group(const IniDocument& doc, ExperimentConfig& c) {
  SectionReader s(doc, "group", {"family", "d", "lambda", "delta", "X2", "X3", "X4", "X5", "X6", "X7", "X8"});
  GroupConfig& g = c.group;
  const std::string fam = s.string("family", "standard");
  if (fam == "standard") g.family = Family::standard;
  else if (fam == "toeplitz") g.family = Family::toeplitz;
  else if (fam == "custom") g.family = Family::custom;
  else throw ConfigError(s.line_of("family"), "unknown family '" + fam + "' (standard, toeplitz, custom)");
  g.d = s.integer("d", 2);
  s.require(g.d >= 2, "d", "d >= 2");
  s.require(g.d <= 8, "d", "d <= 8");
  g.delta = s.number("delta", 1.0 / g.d);
  if (auto l = s.list("lambda")) g.lambda = *l;
  else if (g.family == Family::toeplitz) {
    g.lambda.clear();
    for (int k = 1; k < g.d; ++k) g.lambda.push_back(1.0 - k * g.delta);
  } else g.lambda.assign(g.d - 1, 0.5);
  if (g.family == Family::toeplitz && s.get("lambda"))
    throw ConfigError(s.line_of("lambda"), "toeplitz family derives lambda from delta; remove 'lambda'");
  s.require(static_cast<int>(g.lambda.size()) == g.d - 1, "lambda", "length(lambda) = d - 1");
  const double lmin = *std::min_element(g.lambda.begin(), g.lambda.end());
  const double lmax = *std::max_element(g.lambda.begin(), g.lambda.end());
  const std::string key = g.family == Family::toeplitz ? "delta" : "lambda";
  s.require(lmin > 0.0, key, "λ_min > 0");
  s.require(lmax < 1.0, key, "λ_max < 1");
  s.require(lmin + lmax >= 1.0 - 1e-12, key, "λ_min + λ_max ≥ 1");
  if (g.family == Family::custom) {
    for (int i = 2; i <= g.d; ++i) {
      const std::string k = "X" + std::to_string(i);
      auto m = s.list(k);
      if (!m) throw ConfigError(s.line_of("family"), "custom family needs " + k + " as a row-major list");
      s.require(static_cast<int>(m->size()) == g.d * g.d, k, "d*d entries");
      g.basis.push_back(*m);
    }
  } else {
    for (int i = 2; i <= g.d; ++i)
      if (s.get("X" + std::to_string(i)))
        throw ConfigError(s.line_of("X" + std::to_string(i)), "basis matrices are only read for family = custom");
  }
}

inline void parse_window_cone(const IniDocument& doc, ExperimentConfig& c) {
  SectionReader w(doc, "window", {"tau1", "tau2", "eps0"});
  c.window.tau1 = w.number("tau1", 0.9);
  c.window.tau2 = w.number("tau2", 1.1);
  c.window.eps0 = w.number("eps0", 0.1);
  w.require(c.window.tau1 > 0.0, "tau1", "τ₁ > 0");
  w.require(c.window.tau1 < 1.0, "tau1", "τ₁ < 1");
  w.require(c.window.tau2 > 1.0, "tau2", "τ₂ > 1");
  w.require(c.window.eps0 > 0.0, "eps0", "ε₀ > 0");

  SectionReader k(doc, "cone", {"eps", "R", "sign"});
  c.cone.eps = k.number("eps", 0.1);
  k.require(c.cone.eps > 0.0, "eps", "ε > 0");
  k.require(c.cone.eps < 1.0, "eps", "ε < 1");
  if (const IniValue* v = k.get("R"); v && parse_string(*v) == "auto") c.cone.R_auto = true;
  else {
    c.cone.R = k.number("R", 10.0);
    k.require(c.cone.R > 1.0, "R", "R > 1");
  }
  c.cone.sign = k.integer("sign", 1);
  k.require(c.cone.sign == 1 || c.cone.sign == -1, "sign", "sign ∈ {+1, −1}");
}

inline void parse_wavelet(const IniDocument& doc, ExperimentConfig& c) {
  SectionReader s(doc, "wavelet", {"kind", "r", "core", "support_radius", "mirrored"});
  WaveletConfig& w = c.wavelet;
  const std::string kind = s.string("kind", "bandlimited");
  if (kind == "bandlimited") w.kind = WaveletKind::bandlimited;
  else if (kind == "moment" || kind == "moment_tensor") w.kind = WaveletKind::moment_tensor;
  else throw ConfigError(s.line_of("kind"), "unknown wavelet kind '" + kind + "' (bandlimited, moment)");
  w.mirrored = s.boolean("mirrored", false);
  w.r = s.integer("r", 4);
  s.require(w.r >= 1, "r", "r ≥ 1");
  const std::string core = s.string("core", "gaussian");
  if (core == "gaussian") w.core = Core::gaussian;
  else if (core == "spline") w.core = Core::spline;
  else throw ConfigError(s.line_of("core"), "unknown core '" + core + "' (gaussian, spline)");
  w.support_radius = s.number("support_radius", 1.0);
  s.require(w.support_radius > 0.0, "support_radius", "support_radius > 0");
  if (w.kind == WaveletKind::bandlimited && (s.get("r") || s.get("core") || s.get("support_radius")))
    throw ConfigError(s.line_of("kind"), "r, core and support_radius apply to moment wavelets only");
  if (w.kind == WaveletKind::moment_tensor && s.get("mirrored"))
    throw ConfigError(s.line_of("mirrored"), "mirrored applies to bandlimited wavelets only");
}

inline void parse_signal(const IniDocument& doc, ExperimentConfig& c) {
  SectionReader s(doc, "signal", {"kind", "x0", "offset", "center", "width"});
  SignalConfig& g = c.signal;
  const std::string kind = s.string("kind", "point_delta");
  if (kind == "point_delta") g.kind = DistKind::point_delta;
  else if (kind == "line_delta") g.kind = DistKind::line_delta;
  else if (kind == "halfspace_edge") g.kind = DistKind::halfspace_edge;
  else if (kind == "gaussian") g.kind = DistKind::gaussian;
  else
    throw ConfigError(s.line_of("kind"),
                      "unknown signal kind '" + kind + "' (point_delta, line_delta, halfspace_edge, gaussian)");
  const int d = c.group.d;
  g.x0 = s.list("x0").value_or(std::vector<double>(d, 0.0));
  g.center = s.list("center").value_or(std::vector<double>(d, 0.0));
  s.require(static_cast<int>(g.x0.size()) == d, "x0", "length(x0) = d");
  s.require(static_cast<int>(g.center.size()) == d, "center", "length(center) = d");
  g.offset = s.number("offset", 0.0);
  g.width = s.number("width", 0.3);
  s.require(g.width > 0.0, "width", "width > 0");
}

inline void parse_detect(const IniDocument& doc, ExperimentConfig& c) {
  SectionReader s(doc, "detect", {"N", "scales", "a_start", "ratio", "mode", "grid", "grid_extent",
                                  "directions", "max_slope", "y_radius", "n_y", "eps_star"});
  DetectConfig& g = c.detect;
  if (auto l = s.list("N")) {
    g.N.clear();
    for (double v : *l) {
      s.require(v == std::floor(v) && v >= 0, "N", "N integer ≥ 0");
      g.N.push_back(static_cast<int>(v));
    }
    s.require(!g.N.empty(), "N", "at least one order");
  }
  g.n_scales = s.integer("scales", 10);
  s.require(g.n_scales >= kMinScales, "scales", "scales ≥ " + std::to_string(kMinScales));
  g.a_start = s.number("a_start", 0.0);
  s.require(g.a_start >= 0.0, "a_start", "a_start ≥ 0");
  g.ratio = s.number("ratio", 0.5);
  s.require(g.ratio > 0.0 && g.ratio < 1.0, "ratio", "0 < ratio < 1");
  const std::string mode = s.string("mode", "exact");
  if (mode == "inner") g.mode = LadderMode::inner_box;
  else if (mode == "exact") g.mode = LadderMode::exact_Ki;
  else throw ConfigError(s.line_of("mode"), "mode must be inner or exact");
  g.grid = s.integer("grid", 5);
  s.require(g.grid >= 1, "grid", "grid ≥ 1");
  g.grid_extent = s.number("grid_extent", 0.2);
  s.require(g.grid_extent >= 0.0, "grid_extent", "grid_extent ≥ 0");
  g.directions = s.integer("directions", 7);
  s.require(g.directions >= 1, "directions", "directions ≥ 1");
  g.max_slope = s.number("max_slope", 1.0);
  s.require(g.max_slope >= 0.0, "max_slope", "max_slope ≥ 0");
  g.y_radius = s.number("y_radius", c.cone.eps / 10.0);
  s.require(g.y_radius >= 0.0, "y_radius", "y_radius ≥ 0");
  g.n_y = s.integer("n_y", 5);
  s.require(g.n_y >= 1, "n_y", "n_y ≥ 1");
  g.eps_star = s.number("eps_star", 0.01);
  s.require(g.eps_star > 0.0, "eps_star", "ε* > 0");
}

inline void parse_verify(const IniDocument& doc, ExperimentConfig& c) {
  SectionReader s(doc, "verify", {"samples", "N", "Nu", "n_h", "L"});
  VerifyConfig& v = c.verify;
  v.samples = s.integer("samples", 10000);
  s.require(v.samples >= 1, "samples", "samples ≥ 1");
  v.N = s.integer("N", 2);
  s.require(v.N >= 0, "N", "N ≥ 0");
  v.Nu = s.integer("Nu", 0);
  s.require(v.Nu >= 0, "Nu", "N(u) ≥ 0");
  v.n_h = s.integer("n_h", 6);
  s.require(v.n_h >= 2, "n_h", "n_h ≥ 2");
  if (auto l = s.list("L")) v.L = *l;
  s.require(!v.L.empty(), "L", "at least one L");
  for (double L : v.L) s.require(L >= 0.0, "L", "L ≥ 0");
}

inline void parse_misc(const IniDocument& doc, ExperimentConfig& c) {
  SectionReader o(doc, "output", {"dir"});
  c.output_dir = o.string("dir", ".");
  SectionReader s(doc, "seed", {"value"});
  const double v = s.number("value", 1.0);
  s.require(v >= 0 && v == std::floor(v) && v < 9.007199254740992e15, "value", "integer 0 ≤ seed < 2^53");
  c.seed = static_cast<std::uint64_t>(v);
}

}  // namespace detail

/**
 * @brief Validated configuration; missing sections and keys take defaults.
 */
inline ExperimentConfig parse_config(const std::string& text) {
  const IniDocument doc = parse_ini(text);
  static const std::set<std::string> known{"group",  "window", "cone",   "wavelet", "signal",
                                           "detect", "verify", "output", "seed"};
  for (const auto& s : doc.sections)
    if (!known.count(s.name)) throw ConfigError(s.line, "unknown section [" + s.name + "]");
  ExperimentConfig c;
  detail::parse_group(doc, c);
  detail::parse_window_cone(doc, c);
  detail::parse_wavelet(doc, c);
  detail::parse_signal(doc, c);
  detail::parse_detect(doc, c);
  detail::parse_verify(doc, c);
  detail::parse_misc(doc, c);
  return c;
}

// ---- builders ----

inline GroupSpec make_group_spec(const GroupConfig& g) {
  if (g.family == Family::toeplitz) return toeplitz_basis(g.d, g.delta);
  Vec lambdas = Eigen::Map<const Vec>(g.lambda.data(), static_cast<Eigen::Index>(g.lambda.size()));
  if (g.family == Family::standard) return standard_basis(lambdas);
  GroupSpec s;
  s.d = g.d;
  s.lambdas = lambdas;
  s.family = Family::custom;
  for (const auto& m : g.basis) {
    Mat X(g.d, g.d);
    for (int r = 0; r < g.d; ++r)
      for (int c = 0; c < g.d; ++c) X(r, c) = m[r * g.d + c];
    s.basis.push_back(X);
  }
  return s;
}

//! R = "auto" resolves to 1.05·r_sufficient.
inline ConeSpec make_cone(const ConeConfig& c, const FrequencyWindow& W, const ShearletGroup& G) {
  ConeSpec cone{c.eps, c.R, c.sign};
  if (c.R_auto) {
    cone.R = 1.0;
    cone.R = 1.05 * r_sufficient(cone, W, G);
  }
  return cone;
}

inline Wavelet make_wavelet(const WaveletConfig& w, const FrequencyWindow& W, int d) {
  if (w.kind == WaveletKind::bandlimited) return make_bandlimited(W, w.mirrored, d);
  return make_moment_wavelet(w.r, w.core, w.support_radius, d);
}

inline Vec to_vec(const std::vector<double>& v) {
  return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size()));
}

inline Distribution make_signal(const SignalConfig& s, int d) {
  switch (s.kind) {
    case DistKind::point_delta: return make_point_delta(to_vec(s.x0));
    case DistKind::line_delta: return make_line_delta(d, s.offset);
    case DistKind::halfspace_edge: return make_halfspace(d, s.offset);
    case DistKind::gaussian: return make_gaussian(to_vec(s.center), s.width);
    case DistKind::grid_function: break;
  }
  throw Error(ErrorCode::unsupported, "grid functions are not configurable");
}

}  // namespace wfset
