#include <wfset/io.hpp>

#include <gtest/gtest.h>

#include <sys/wait.h>

#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;

namespace {

const std::string kCli = WFSET_CLI_PATH;
const std::string kConfigs = WFSET_CONFIG_DIR;

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("wfset_cli_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

//! Runs the CLI with output captured to a file; returns the exit status.
int run(const std::string& args, const fs::path& dir, const std::string& env = "") {
  const std::string cmd = env + " '" + kCli + "' " + args + " > '" + (dir / "stdout.txt").string() + "' 2> '" +
                          (dir / "stderr.txt").string() + "'";
  const int raw = std::system(cmd.c_str());
  return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::string cfg(const std::string& name) { return "-c '" + kConfigs + "/" + name + "'"; }

}  // namespace

TEST(Cli, MissingConfigIsAnError) {
  const fs::path d = scratch("missing");
  EXPECT_EQ(run("-c /nonexistent.ini group validate", d), 2);
  EXPECT_NE(slurp(d / "stderr.txt").find("cannot open"), std::string::npos);
  EXPECT_EQ(run("group validate", d), 2);
}

TEST(Cli, InvalidConfigReportsTheConstraint) {
  const fs::path d = scratch("invalid");
  const fs::path bad = d / "bad.ini";
  std::ofstream(bad) << "[group]\nlambda = [1.5]\n";
  EXPECT_EQ(run("-c '" + bad.string() + "' group validate", d), 2);
  const std::string err = slurp(d / "stderr.txt");
  EXPECT_NE(err.find("line 2"), std::string::npos) << err;
  EXPECT_NE(err.find("λ_max < 1"), std::string::npos) << err;
}

TEST(Cli, GroupValidateAndConstants) {
  const fs::path d = scratch("constants");
  EXPECT_EQ(run(cfg("standard_2d.ini") + " -o '" + d.string() + "' group validate", d), 0);
  EXPECT_EQ(run(cfg("standard_2d.ini") + " -o '" + d.string() + "' group constants --N 2", d), 0);
  const std::string t = slurp(d / "constants.tsv");
  EXPECT_EQ(t.rfind("# table: constants", 0), 0u) << t;
  EXPECT_NE(t.find("105"), std::string::npos);
}

TEST(Cli, VerifyConstantsSuite) {
  const fs::path d = scratch("verify");
  EXPECT_EQ(run(cfg("standard_2d.ini") + " -o '" + d.string() + "' verify --suite constants", d), 0);
  EXPECT_TRUE(fs::exists(d / "verify_constants.tsv"));
  EXPECT_EQ(run(cfg("standard_2d.ini") + " -o '" + d.string() + "' verify --suite nonsense", d), 2);
}

TEST(Cli, WaveletMakeAndCheck) {
  const fs::path d = scratch("wavelet");
  EXPECT_EQ(run(cfg("detect_gaussian.ini") + " -o '" + d.string() + "' wavelet make --grid 17", d), 0);
  EXPECT_TRUE(fs::exists(d / "wavelet_fourier.tsv"));
  EXPECT_TRUE(fs::exists(d / "wavelet_space.tsv"));
  EXPECT_EQ(run(cfg("detect_gaussian.ini") + " -o '" + d.string() + "' wavelet check", d), 0);
}

TEST(Cli, TransformWritesRawDump) {
  const fs::path d = scratch("transform");
  EXPECT_EQ(run(cfg("standard_2d.ini") + " -o '" + d.string() + "' transform --points '0,0;0.1,0' --dilations '0:0.05;0.01:0.02' --raw", d), 0);
  const wfset::RawArray a = wfset::read_raw(slurp(d / "transform.raw"));
  EXPECT_EQ(a.dims, (std::vector<std::int64_t>{2, 2, 2}));
  EXPECT_EQ(run(cfg("standard_2d.ini") + " -o '" + d.string() + "' transform --dilations '0:0'", d), 2);
}

TEST(Cli, DetectGaussianHasNoSingularCells) {
  const fs::path d = scratch("detect");
  EXPECT_EQ(run(cfg("detect_gaussian.ini") + " -o '" + d.string() + "' detect", d), 0);
  const std::string v = slurp(d / "verdicts.tsv");
  EXPECT_FALSE(v.empty());
  EXPECT_EQ(v.find("\tsingular\t"), std::string::npos);
  EXPECT_TRUE(fs::exists(d / "loglog" / "cell_p0_d0.tsv"));
}

TEST(Cli, OutputsAreByteIdenticalAcrossRunsAndThreads) {
  const fs::path a = scratch("det_a"), b = scratch("det_b"), c = scratch("det_c");
  const std::string args = cfg("detect_gaussian.ini") + " -o '%' detect --grid 2 --directions 2";
  auto with = [&](const fs::path& p) {
    std::string s = args;
    s.replace(s.find('%'), 1, p.string());
    return s;
  };
  ASSERT_EQ(run(with(a), a, "WFSET_THREADS=1"), 0);
  ASSERT_EQ(run(with(b), b, "WFSET_THREADS=1"), 0);
  ASSERT_EQ(run(with(c), c, "WFSET_THREADS=4"), 0);
  for (const auto& e : fs::recursive_directory_iterator(a)) {
    if (!e.is_regular_file() || e.path().filename() == "stderr.txt") continue;
    const fs::path rel = fs::relative(e.path(), a);
    EXPECT_EQ(slurp(e.path()), slurp(b / rel)) << rel;
    EXPECT_EQ(slurp(e.path()), slurp(c / rel)) << rel;
  }
}
