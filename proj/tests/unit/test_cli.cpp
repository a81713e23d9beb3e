#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "tracefail/commands.hpp"

using namespace tracefail::cli;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const char* kSpec = R"(name = "unit"
seed = 5
n_faultfree = 20
n_per_fault = 4
n_idle = 1

[workload]
alphabet_size = 48
backbone_length = 150
backbone_symbols = [0, 29]
idle_types = [45, 46, 47]
idle_rate = 0.05

[catalog]
modes = 3
inserts = 2
deletes = 1
replaces = 1
error_symbols = [30, 44]
)";

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result cli(std::vector<std::string> args) {
  args.insert(args.begin(), "tracefail");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

json read(const fs::path& p) {
  std::ifstream in(p);
  return json::parse(in);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    root_ = fs::temp_directory_path() / ("tracefail-cli-" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(root_);
    fs::create_directories(root_);
    std::ofstream(root_ / "unit.toml") << kSpec;
  }
  void TearDown() override { fs::remove_all(root_); }

  fs::path campaign() {
    const auto r = cli({"generate", (root_ / "unit.toml").string(), "--out", (root_ / "camp").string()});
    EXPECT_EQ(r.code, kExitOk) << r.err;
    return root_ / "camp";
  }

  fs::path root_;
};

}  // namespace

TEST_F(Cli, UsageErrorsExitTwo) {
  auto r = cli({"generate", (root_ / "nope.toml").string()});
  EXPECT_EQ(r.code, kExitUsage);
  EXPECT_NE(r.err.find("spec not found"), std::string::npos);
  EXPECT_EQ(cli({}).code, kExitUsage);
  EXPECT_EQ(cli({"frobnicate"}).code, kExitUsage);
  EXPECT_EQ(cli({"analyze"}).code, kExitUsage);
  EXPECT_EQ(cli({"analyze", (root_ / "missing").string()}).code, kExitUsage);
  const auto c = campaign();
  EXPECT_EQ(cli({"analyze", c.string(), "--d", "0"}).code, kExitUsage);
  EXPECT_EQ(cli({"analyze", c.string(), "--eps-spurious", "2"}).code, kExitUsage);
  EXPECT_EQ(cli({"analyze", c.string(), "--d", "abc"}).code, kExitUsage);
  EXPECT_EQ(cli({"cluster", c.string(), "--k-range", "5..2"}).code, kExitUsage);
  EXPECT_EQ(cli({"cluster", c.string(), "--k-range", "x"}).code, kExitUsage);
  EXPECT_EQ(cli({"--help"}).code, kExitOk);
}

TEST_F(Cli, KRangeParsing) {
  EXPECT_EQ(parse_k_range("2..20"), (std::pair<std::size_t, std::size_t>{2, 20}));
  EXPECT_EQ(parse_k_range("4"), (std::pair<std::size_t, std::size_t>{4, 4}));
  EXPECT_THROW(parse_k_range("2.."), UsageError);
  EXPECT_THROW(parse_k_range("a..b"), UsageError);
}

TEST_F(Cli, TooFewFaultFreeTracesExitOne) {
  const auto c = campaign();
  std::vector<fs::path> ff;
  for (const auto& e : fs::directory_iterator(c / "faultfree")) ff.push_back(e.path());
  std::sort(ff.begin(), ff.end());
  for (std::size_t i = 1; i < ff.size(); ++i) fs::remove(ff[i]);
  const auto r = cli({"analyze", c.string()});
  EXPECT_EQ(r.code, kExitAnalysis);
  EXPECT_NE(r.err.find("at least 2"), std::string::npos);
}

TEST_F(Cli, EndToEndZeroNoise) {
  const auto c = campaign();
  ASSERT_EQ(cli({"analyze", c.string(), "--deterministic"}).code, kExitOk);
  const auto reports = c / "reports";
  const auto summary = read(reports / "summary.json");
  EXPECT_DOUBLE_EQ(summary["metrics"]["lcs_vmm"]["false_alarm_rate"].get<double>(), 0.0);
  EXPECT_DOUBLE_EQ(summary["metrics"]["lcs_vmm"]["hit_rate"].get<double>(), 1.0);
  EXPECT_EQ(summary["experiment_count"], 12);

  const auto m = cli({"metrics", reports.string(), (c / "ground_truth.json").string()});
  ASSERT_EQ(m.code, kExitOk) << m.err;
  EXPECT_DOUBLE_EQ(json::parse(m.out)["lcs_vmm"]["false_alarm_rate"].get<double>(), 0.0);

  ASSERT_EQ(cli({"cluster", reports.string(), "--deterministic"}).code, kExitOk);
  const auto cluster = read(reports / "cluster.json");
  EXPECT_EQ(cluster["best_k"], 3);
  EXPECT_DOUBLE_EQ(cluster["purity"].get<double>(), 1.0);

  const auto index = slurp(reports / "html" / "index.html");
  EXPECT_EQ(index.find("src=\"http"), std::string::npos);
  EXPECT_EQ(index.find("href=\"http"), std::string::npos);
  for (const auto& e : fs::directory_iterator(reports / "experiments"))
    EXPECT_TRUE(fs::is_regular_file(reports / "html" / "exp" / (e.path().stem().string() + ".html")));
}

TEST_F(Cli, ThresholdEndpointsReproduceLcsCounts) {
  const auto c = campaign();
  ASSERT_EQ(cli({"analyze", c.string(), "--eps-spurious", "1", "--eps-missing", "0", "--out", (root_ / "r").string()}).code,
            kExitOk);
  const auto s = read(root_ / "r" / "summary.json");
  for (const auto& e : s["experiments"]) {
    EXPECT_EQ(e["counts"]["filtered_spurious"], 0);
    EXPECT_EQ(e["counts"]["filtered_missing"], 0);
  }
}

TEST_F(Cli, KRangeForcesK) {
  const auto c = campaign();
  ASSERT_EQ(cli({"analyze", c.string()}).code, kExitOk);
  ASSERT_EQ(cli({"cluster", (c / "reports").string(), "--k-range", "2..2"}).code, kExitOk);
  EXPECT_EQ(read(c / "reports" / "cluster.json")["best_k"], 2);
}

TEST_F(Cli, FlagBeatsEnvironment) {
  const auto c = campaign();
  ::setenv("TF_D", "2", 1);
  ASSERT_EQ(cli({"analyze", c.string(), "--out", (root_ / "env").string()}).code, kExitOk);
  EXPECT_EQ(read(root_ / "env" / "summary.json")["settings"]["d"], 2);
  ASSERT_EQ(cli({"analyze", c.string(), "--d", "4", "--out", (root_ / "flag").string()}).code, kExitOk);
  EXPECT_EQ(read(root_ / "flag" / "summary.json")["settings"]["d"], 4);
  ::unsetenv("TF_D");
  ASSERT_EQ(cli({"analyze", c.string(), "--out", (root_ / "dflt").string()}).code, kExitOk);
  EXPECT_EQ(read(root_ / "dflt" / "summary.json")["settings"]["d"], 5);
}

TEST_F(Cli, RerunIsByteIdentical) {
  for (const char* tag : {"a", "b"}) {
    const auto out = root_ / tag;
    ASSERT_EQ(cli({"generate", (root_ / "unit.toml").string(), "--out", out.string(), "--seed", "9"}).code, kExitOk);
    ASSERT_EQ(cli({"analyze", out.string(), "--deterministic", "--workers", tag == std::string("a") ? "1" : "3"}).code,
              kExitOk);
    ASSERT_EQ(cli({"cluster", (out / "reports").string(), "--deterministic"}).code, kExitOk);
  }
  std::size_t files = 0;
  for (const auto& e : fs::recursive_directory_iterator(root_ / "a")) {
    if (!e.is_regular_file()) continue;
    ++files;
    EXPECT_EQ(slurp(e.path()), slurp(root_ / "b" / fs::relative(e.path(), root_ / "a"))) << e.path();
  }
  EXPECT_GT(files, 30u);
  EXPECT_EQ(read(root_ / "a" / "ground_truth.json")["seed"], 9);
}
