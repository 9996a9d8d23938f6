#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <sstream>

#include "heteroflow/io.hpp"
#include "heteroflow_cli/app.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using heteroflow::io::read_text;
using heteroflow::io::write_text;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result cli(std::vector<std::string> args) {
  args.insert(args.begin(), "heteroflow");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out;
  std::ostringstream err;
  const int code = heteroflow::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    unsetenv("HETEROFLOW_SEED");
    dir_ = fs::temp_directory_path() / ("heteroflow_cli_" + std::string(
                                            ::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { unsetenv("HETEROFLOW_SEED"); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  Result small_gen(const std::string& out, std::vector<std::string> extra = {}, int backbones = 4) {
    std::vector<std::string> args{"gen", "--out", path(out), "--backbones", std::to_string(backbones), "--motifs", "2",
                                  "--backbone-min", "8", "--backbone-max", "12", "--quadrant", "hom-het"};
    args.insert(args.end(), extra.begin(), extra.end());
    return cli(args);
  }

  fs::path dir_;
};

}  // namespace

TEST_F(Cli, UsageErrors) {
  EXPECT_EQ(cli({"--help"}).code, 0);
  EXPECT_EQ(cli({}).code, 1);
  EXPECT_EQ(cli({"bogus"}).code, 1);
  EXPECT_EQ(cli({"gen"}).code, 1);  // --out is required
  EXPECT_EQ(cli({"train", "--out", path("x"), "--family", "mlp"}).code, 1);
  EXPECT_EQ(cli({"--version"}).code, 0);
}

TEST_F(Cli, GenWritesSelfDescribingArtifacts) {
  const auto r = small_gen("g", {"--seed", "5"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto manifest = nlohmann::json::parse(read_text(path("g/manifest.json")));
  EXPECT_EQ(manifest["seed"], 5);
  EXPECT_EQ(manifest["datasets"][0]["records"], 16);  // 4 x 2 positives + 8 negatives
  EXPECT_EQ(manifest["datasets"][0]["positives"], 8);
  EXPECT_TRUE(fs::exists(path("g/hom-het.split.json")));
  const auto run = nlohmann::json::parse(read_text(path("g/run.json")));
  EXPECT_EQ(run["tool_version"], std::string(heteroflow::io::kToolVersion));
  EXPECT_EQ(run["command"], "gen");
  EXPECT_NE(read_text(path("g/config.ini")).find("backbones=4"), std::string::npos);

  ASSERT_EQ(small_gen("h", {"--seed", "5"}).code, 0);
  EXPECT_EQ(read_text(path("g/hom-het.jsonl")), read_text(path("h/hom-het.jsonl")));
  EXPECT_EQ(read_text(path("g/manifest.json")), read_text(path("h/manifest.json")));
}

TEST_F(Cli, SeedEnvironmentOverride) {
  setenv("HETEROFLOW_SEED", "42", 1);
  ASSERT_EQ(small_gen("g", {"--seed", "5"}).code, 0);
  EXPECT_EQ(nlohmann::json::parse(read_text(path("g/run.json")))["seed"], 42);
  unsetenv("HETEROFLOW_SEED");
  ASSERT_EQ(small_gen("h", {"--seed", "42"}).code, 0);
  EXPECT_EQ(read_text(path("g/hom-het.jsonl")), read_text(path("h/hom-het.jsonl")));
  setenv("HETEROFLOW_SEED", "abc", 1);
  EXPECT_EQ(small_gen("k").code, 2);
}

TEST_F(Cli, ConfigFile) {
  write_text(path("cfg.ini"), "[gen]\nbackbones=5\nmotifs=1\nbackbone-min=8\nbackbone-max=10\nquadrant=het-het\n");
  const auto r = cli({"--config", path("cfg.ini"), "gen", "--out", path("g")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto manifest = nlohmann::json::parse(read_text(path("g/manifest.json")));
  EXPECT_EQ(manifest["datasets"][0]["records"], 10);
  EXPECT_EQ(manifest["datasets"][0]["quadrant"], "het-het");
}

TEST_F(Cli, InvalidGenConfigIsValidationError) {
  EXPECT_EQ(small_gen("g", {"--noise", "0"}).code, 2);
  EXPECT_EQ(small_gen("g", {"--train", "0.5"}).code, 2);
}

TEST_F(Cli, SimulateBarbellNegativeWeight) {
  const auto r = cli({"simulate", "--barbell", "10", "5", "--w", "-1", "--renormalize", "--out", path("s")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto verdict = nlohmann::json::parse(read_text(path("s/verdict.json")));
  EXPECT_EQ(verdict["predicted"]["regime"], "HFD");
  EXPECT_EQ(verdict["empirical"], "HFD");
  const std::string csv = read_text(path("s/trace.csv"));
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1 + 2001);
}

TEST_F(Cli, SimulateZeroWeightIsFlagged) {
  const auto r = cli({"simulate", "--random", "8", "--w", "0", "--steps", "10", "--out", path("s")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("degenerate"), std::string::npos);
  EXPECT_EQ(nlohmann::json::parse(read_text(path("s/verdict.json")))["predicted"]["regime"], "boundary");
}

TEST_F(Cli, SimulateDivergenceIsNumericalFailure) {
  const auto r = cli({"simulate", "--barbell", "3", "1", "--w", "-50", "--tau", "1", "--out", path("s")});
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.err.find("--renormalize"), std::string::npos);
}

TEST_F(Cli, RegimeFromWeightFile) {
  write_text(path("w.json"), R"({"w": [[1, 0], [0, -2]]})");
  const auto r = cli({"regime", "--barbell", "4", "2", "--weights", path("w.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(nlohmann::json::parse(r.out)["regime"], "HFD");
  write_text(path("bad.json"), R"({"w": [[1, 2], [0, -2]]})");
  EXPECT_EQ(cli({"regime", "--barbell", "4", "2", "--weights", path("bad.json")}).code, 2);
  EXPECT_EQ(cli({"regime", "--w", "1"}).code, 2);  // no graph source
}

TEST_F(Cli, TrainEvalReportPipeline) {
  ASSERT_EQ(small_gen("g", {}, 10).code, 0);
  const auto t = cli({"train", "--dataset-dir", path("g"), "--out", path("t"), "--epochs", "3", "--family", "gcn",
                      "--family", "adaptive_mix", "--jobs", "2"});
  ASSERT_EQ(t.code, 0) << t.err;
  for (const char* f : {"t/hom-het/gcn/seed0/report.json", "t/hom-het/adaptive_mix/seed0/metrics.json",
                        "t/summary.csv", "t/metrics.csv", "t/runs.csv", "t/config.ini"})
    EXPECT_TRUE(fs::exists(path(f))) << f;

  const auto m = cli({"eval-mmd", "--data", path("g/hom-het.jsonl"), "--report", path("t/hom-het/gcn/seed0/report.json")});
  ASSERT_EQ(m.code, 0) << m.err;
  const auto stored = nlohmann::json::parse(read_text(path("t/hom-het/gcn/seed0/metrics.json")));
  EXPECT_EQ(nlohmann::json::parse(m.out)["mmd2"], stored["mmd2"]);

  const auto s = cli({"shrink", "--data", path("g/hom-het.jsonl"), "--report", path("t/hom-het/gcn/seed0/report.json")});
  ASSERT_EQ(s.code, 0) << s.err;
  EXPECT_EQ(nlohmann::json::parse(s.out)["boundary"], stored["shrink"]["boundary"]);

  const auto rep = cli({"report", "--in", path("t")});
  ASSERT_EQ(rep.code, 0) << rep.err;
  EXPECT_EQ(rep.out, read_text(path("t/summary.csv")));
}

TEST_F(Cli, SplitCommand) {
  ASSERT_EQ(small_gen("g").code, 0);
  const auto r = cli({"split", "--data", path("g/hom-het.jsonl"), "--out", path("s/split.json"), "--seed", "3"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto s = heteroflow::io::split_from_json(read_text(path("s/split.json")));
  EXPECT_EQ(s.train.size() + s.val.size() + s.test.size(), 16u);
  EXPECT_EQ(cli({"split", "--data", path("missing.jsonl"), "--out", path("s/x.json")}).code, 2);
}

TEST_F(Cli, IngestAndRegressionTraining) {
  std::string text;
  for (int i = 0; i < 20; ++i) {
    const double x = 0.1 * i;
    text += R"({"graph": {"n": 3, "edges": [[0, 1], [1, 2]]}, "features": {"shape": [3, 1], "data": [)" +
            std::to_string(x) + ", " + std::to_string(-x) + ", 1]}, \"target\": " + std::to_string(2 * x) + "}\n";
  }
  write_text(path("reg.jsonl"), text);
  ASSERT_EQ(cli({"ingest", "--in", path("reg.jsonl"), "--out", path("i")}).code, 0);
  const auto t = cli({"train", "--data", path("i/dataset.jsonl"), "--split", path("i/dataset.split.json"), "--loss",
                      "mse", "--epochs", "20", "--family", "gcn", "--out", path("t")});
  ASSERT_EQ(t.code, 0) << t.err;
  EXPECT_NE(read_text(path("t/runs.csv")).find("test_mse"), std::string::npos);

  write_text(path("bad.jsonl"), text + R"({"graph": {"n": 2, "edges": [[0, 0]]}, "features": {"shape": [2, 1], "data": [0, 0]}, "target": 1})" "\n");
  const auto bad = cli({"ingest", "--in", path("bad.jsonl"), "--out", path("j")});
  EXPECT_EQ(bad.code, 2);
  EXPECT_NE(bad.err.find("line 21"), std::string::npos) << bad.err;
}

TEST(RunJobs, OrderIndependentAndRethrows) {
  std::vector<int> slots(50, 0);
  heteroflow::cli::run_jobs(4, 50, [&](int i) { slots[static_cast<std::size_t>(i)] = i * i; });
  for (int i = 0; i < 50; ++i) EXPECT_EQ(slots[static_cast<std::size_t>(i)], i * i);
  EXPECT_THROW(heteroflow::cli::run_jobs(3, 10, [](int i) { if (i == 7) throw std::runtime_error("x"); }),
               std::runtime_error);
  heteroflow::cli::run_jobs(2, 0, [](int) { FAIL(); });
}
