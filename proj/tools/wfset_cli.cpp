// wfset: command-line front end for the wavefront-set detection library.

#include <wfset/experiment.hpp>

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

using wfset::ConfigError;

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError(0, "cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::vector<double> split_numbers(const std::string& s, char sep, const std::string& what) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError(0, "bad number '" + item + "' in " + what);
    }
  }
  return out;
}

//! "x1,x2;y1,y2" → points of dimension d.
std::vector<wfset::Vec> parse_points(const std::string& s, int d) {
  std::vector<wfset::Vec> pts;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ';')) {
    const auto v = split_numbers(item, ',', "--points");
    if (static_cast<int>(v.size()) != d) throw ConfigError(0, "--points entries need " + std::to_string(d) + " coordinates");
    pts.push_back(wfset::to_vec(v));
  }
  return pts;
}

//! "t2,…,td:a;…" → group elements.
std::vector<wfset::GroupElement> parse_dilations(const std::string& s, const wfset::ShearletGroup& G) {
  std::vector<wfset::GroupElement> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ';')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) throw ConfigError(0, "--dilations entries look like t:a");
    const auto t = split_numbers(item.substr(0, colon), ',', "--dilations");
    const auto a = split_numbers(item.substr(colon + 1), ',', "--dilations");
    if (static_cast<int>(t.size()) != G.dim_shear() || a.size() != 1)
      throw ConfigError(0, "--dilations entries need d-1 shears and one scale");
    try {
      out.push_back(G.element(wfset::to_vec(t), a[0]));
    } catch (const wfset::Error& e) {
      throw ConfigError(0, std::string("--dilations: ") + e.what());
    }
  }
  return out;
}

void emit(const wfset::RunOutput& r, const std::string& dir) {
  for (const auto& [name, bytes] : r.files) {
    const std::filesystem::path p = std::filesystem::path(dir) / name;
    std::filesystem::create_directories(p.parent_path());
    wfset::write_file(p.string(), bytes);
  }
  for (const auto& line : r.summary) std::cout << line << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Shearlet wavefront-set detection: group algebra, wavelets, transforms, detection, verification"};
  app.require_subcommand(1);
  std::string config_path, out_dir;
  app.add_option("-c,--config", config_path, "experiment config file")->required();
  app.add_option("-o,--out", out_dir, "output directory (overrides [output] dir)");

  auto* group = app.add_subcommand("group", "group spec checks");
  group->require_subcommand(1);
  auto* g_validate = group->add_subcommand("validate", "algebra closure and detection constraints");
  auto* g_constants = group->add_subcommand("constants", "constants ledger as TSV");
  int ledger_N = -1, ledger_Nu = -1;
  g_constants->add_option("--N", ledger_N, "smoothness order N");
  g_constants->add_option("--Nu", ledger_Nu, "distribution order N(u)");

  auto* wavelet = app.add_subcommand("wavelet", "wavelet construction");
  wavelet->require_subcommand(1);
  auto* w_make = wavelet->add_subcommand("make", "sample the configured wavelet");
  int w_grid = 65;
  w_make->add_option("--grid", w_grid, "samples per axis")->check(CLI::Range(2, 4097));
  auto* w_check = wavelet->add_subcommand("check", "vanishing moments and admissibility");
  int w_r = 0;
  w_check->add_option("--r", w_r, "moment order to test (default: declared r)");

  auto* transform = app.add_subcommand("transform", "coefficients on point and dilation lists");
  std::string t_points, t_dilations;
  bool t_raw = false;
  transform->add_option("--points", t_points, "points 'x1,x2;...' (default: origin)");
  transform->add_option("--dilations", t_dilations, "dilations 't:a;...' (default: detection ladder)");
  transform->add_flag("--raw", t_raw, "also write transform.raw");

  auto* detect = app.add_subcommand("detect", "wavefront map with verdicts");
  std::string d_N, d_mode;
  int d_scales = 0, d_grid = 0, d_dirs = 0;
  detect->add_option("--N", d_N, "orders, e.g. 1,2,3");
  detect->add_option("--scales", d_scales, "ladder length")->check(CLI::PositiveNumber);
  detect->add_option("--grid", d_grid, "points per axis")->check(CLI::PositiveNumber);
  detect->add_option("--directions", d_dirs, "number of directions")->check(CLI::PositiveNumber);
  detect->add_option("--mode", d_mode, "ladder membership")->check(CLI::IsMember({"inner", "exact"}));

  auto* verify = app.add_subcommand("verify", "numerical checks of the constants and inequalities");
  std::string v_suite;
  std::uint64_t v_seed = 0;
  bool v_seed_set = false;
  verify->add_option("--suite", v_suite, "check suite")->required()->check(CLI::IsMember(wfset::verify_suites()));
  verify->add_option("--seed", v_seed, "sampling seed (default: [seed] value)")
      ->each([&](const std::string&) { v_seed_set = true; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    wfset::ExperimentConfig cfg = wfset::parse_config(read_file(config_path));
    const std::string dir = out_dir.empty() ? cfg.output_dir : out_dir;
    wfset::RunOutput r;
    if (*g_validate) r = wfset::run_group_validate(cfg);
    else if (*g_constants) {
      if (ledger_N >= 0) cfg.verify.N = ledger_N;
      if (ledger_Nu >= 0) cfg.verify.Nu = ledger_Nu;
      r = wfset::run_group_constants(cfg);
    } else if (*w_make) r = wfset::run_wavelet_make(cfg, w_grid);
    else if (*w_check) r = wfset::run_wavelet_check(cfg, w_r);
    else if (*transform) {
      wfset::ShearletGroup G(wfset::make_group_spec(cfg.group));
      wfset::TransformRequest req;
      req.raw = t_raw;
      req.points = t_points.empty() ? std::vector<wfset::Vec>{wfset::Vec::Zero(G.d())} : parse_points(t_points, G.d());
      if (t_dilations.empty()) {
        wfset::LadderOptions lo;
        lo.n_scales = cfg.detect.n_scales;
        lo.a_start = cfg.detect.a_start;
        lo.ratio = cfg.detect.ratio;
        const wfset::ConeSpec cone = wfset::make_cone(cfg.cone, cfg.window, G);
        req.dilations = wfset::build_ladder(G, cone, cfg.window, cfg.detect.mode, lo).elements;
      } else {
        req.dilations = parse_dilations(t_dilations, G);
      }
      r = wfset::run_transform(cfg, req);
    } else if (*detect) {
      if (!d_N.empty()) {
        cfg.detect.N.clear();
        for (double v : split_numbers(d_N, ',', "--N")) {
          if (v < 0 || v != std::floor(v)) throw ConfigError(0, "--N entries must be integers >= 0");
          cfg.detect.N.push_back(static_cast<int>(v));
        }
      }
      if (d_scales) cfg.detect.n_scales = d_scales;
      if (d_grid) cfg.detect.grid = d_grid;
      if (d_dirs) cfg.detect.directions = d_dirs;
      if (!d_mode.empty()) cfg.detect.mode = d_mode == "inner" ? wfset::LadderMode::inner_box : wfset::LadderMode::exact_Ki;
      r = wfset::run_detect(cfg);
    } else if (*verify) {
      r = wfset::run_verify(cfg, v_suite, v_seed_set ? v_seed : cfg.seed);
    }
    emit(r, dir);
    return r.status;
  } catch (const wfset::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
