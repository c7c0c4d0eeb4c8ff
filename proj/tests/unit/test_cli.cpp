#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "rfs/cli.hpp"
#include "rfs/error.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("rfs_cli_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

struct Run {
  int code = -1;
  std::string output;
};

Run run(const std::string& command, const fs::path& config, const std::string& extra = {}) {
  const auto log = config.parent_path() / "stdout.txt";
  const std::string cmd = std::string(RFS_CLI_PATH) + " " + command + " --config " + config.string() + " " + extra +
                          " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(log)};
}

fs::path write_config(const fs::path& dir, json j) {
  if (!j.contains("output_dir")) j["output_dir"] = (dir / "out").string();
  const auto p = dir / "config.json";
  write(p, j.dump(2));
  return p;
}

json gc_dataset(std::size_t n = 200) {
  return {{"id", "GC"}, {"preprocess", {{"subsample_n", n}, {"lasso_min_features", 20}}}};
}

std::size_t lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

std::vector<double> weights(const fs::path& model) {
  return json::parse(slurp(model)).at("weights").get<std::vector<double>>();
}

}  // namespace

TEST(Cli, HelpAndBadCommand) {
  const auto dir = scratch("help");
  const auto cfg = write_config(dir, {{"dataset", gc_dataset()}});
  EXPECT_EQ(std::system((std::string(RFS_CLI_PATH) + " --help > /dev/null").c_str()), 0);
  EXPECT_EQ(run("bogus", cfg).code, 2);
  EXPECT_EQ(run("cv", dir / "missing.json").code, 2);
}

TEST(Cli, UnknownKeyIsAConfigError) {
  const auto dir = scratch("unknown");
  EXPECT_EQ(run("cv", write_config(dir, {{"dataset", gc_dataset()}, {"modle", json::object()}})).code, 2);
  EXPECT_EQ(run("cv", write_config(dir, {{"dataset", gc_dataset()},
                                         {"model", {{"family", "LR"}, {"hyperparams", {{"rhoo", 1}}}}}}))
                .code,
            2);
}

TEST(Cli, NegativeAgeThresholdIsAConfigError) {
  const auto dir = scratch("age");
  auto ds = gc_dataset();
  ds["preprocess"]["age_threshold"] = -1;
  EXPECT_EQ(run("prep", write_config(dir, {{"dataset", ds}})).code, 2);
}

TEST(Cli, MissingDataFileIsADataError) {
  const auto dir = scratch("nofile");
  const json ds = {{"id", "X"}, {"path", "nowhere.csv"}, {"schema", (fs::path(RFS_CONFIG_DIR) / ".." / "data" / "german_credit.schema.json").string()}};
  EXPECT_EQ(run("prep", write_config(dir, {{"dataset", ds}})).code, 3);
}

TEST(Cli, PrepSubsampleGivesExactRowCount) {
  const auto dir = scratch("prep");
  // A synthetic table larger than the bundled one.
  std::mt19937_64 rng(50);
  std::normal_distribution<double> normal;
  std::uniform_int_distribution<int> age(19, 70);
  std::bernoulli_distribution coin(0.3);
  std::string csv = "a,b,age,y\n";
  for (int i = 0; i < 6000; ++i) {
    csv += std::to_string(normal(rng)) + "," + std::to_string(normal(rng)) + "," + std::to_string(age(rng)) + "," +
           (coin(rng) ? "1" : "0") + "\n";
  }
  write(dir / "big.csv", csv);
  const json schema = {{"target", "y"},
                       {"age", "age"},
                       {"label_map", {{"1", 1}, {"0", 0}}},
                       {"columns", {{"a", "numeric"}, {"b", "numeric"}, {"age", "numeric"}}}};
  const json ds = {{"id", "BIG"}, {"path", "big.csv"}, {"schema", schema}, {"preprocess", {{"subsample_n", 5000}}}};
  const auto r = run("prep", write_config(dir, {{"dataset", ds}}));
  ASSERT_EQ(r.code, 0) << r.output;
  EXPECT_EQ(lines(slurp(dir / "out" / "BIG.prepared.csv")), 5001u);
  EXPECT_TRUE(fs::exists(dir / "out" / "BIG.stats.json"));
  EXPECT_TRUE(fs::exists(dir / "out" / "manifest.json"));
}

TEST(Cli, EtaAboveBoundIsRejectedWithTheBound) {
  const auto dir = scratch("eta");
  const json model = {{"family", "DRFLR"}, {"hyperparams", {{"rho", 0.01}, {"eta", 0.5}}}};
  const auto r = run("train", write_config(dir, {{"dataset", gc_dataset()}, {"model", model}}));
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.output.find("eta_max"), std::string::npos) << r.output;
}

TEST(Cli, ZeroRadiusDrlrTrainsToLr) {
  const auto dir = scratch("train");
  const auto lr_dir = dir / "lr";
  const auto dr_dir = dir / "drlr";
  fs::create_directories(lr_dir);
  fs::create_directories(dr_dir);
  const json lr = {{"family", "LR"}, {"hyperparams", json::object()}};
  const json drlr = {{"family", "DRLR"}, {"hyperparams", {{"rho", 0.0}, {"kappa_y", 0.4}}}};
  ASSERT_EQ(run("train", write_config(lr_dir, {{"dataset", gc_dataset()}, {"model", lr}})).code, 0);
  ASSERT_EQ(run("train", write_config(dr_dir, {{"dataset", gc_dataset()}, {"model", drlr}})).code, 0);
  const auto a = weights(lr_dir / "out" / "model.json");
  const auto b = weights(dr_dir / "out" / "model.json");
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], 1e-4) << i;
}

TEST(Cli, CvIsIdempotent) {
  const auto dir = scratch("cv");
  const json model = {{"family", "DRLR"}, {"hyperparams", {{"rho", 0.01}, {"kappa_y", 0.4}}}};
  const auto cfg = write_config(dir, {{"dataset", gc_dataset()}, {"model", model}});
  ASSERT_EQ(run("cv", cfg, "--output " + (dir / "a").string()).code, 0);
  ASSERT_EQ(run("cv", cfg, "--output " + (dir / "b").string() + " --threads 2").code, 0);
  const auto folds = slurp(dir / "a" / "folds.csv");
  EXPECT_EQ(folds.rfind("dataset,model,fold,metric,value\n", 0), 0u);
  EXPECT_EQ(lines(folds), 1u + 5u * 4u);
  EXPECT_EQ(folds, slurp(dir / "b" / "folds.csv"));
  EXPECT_EQ(slurp(dir / "a" / "report.json"), slurp(dir / "b" / "report.json"));
}

TEST(Cli, SweepHasOneRowPerValue) {
  const auto dir = scratch("sweep");
  const json model = {{"family", "DRLR"}, {"hyperparams", {{"rho", 0.01}, {"kappa_y", 0.4}}}};
  const json exp = {{"kind", "sweep"}, {"params", {{"parameter", "rho"}, {"values", {0.0, 0.01, 0.1}}}}};
  const auto r = run("sweep", write_config(dir, {{"dataset", gc_dataset()}, {"model", model}, {"experiment", exp}}));
  ASSERT_EQ(r.code, 0) << r.output;
  EXPECT_EQ(lines(slurp(dir / "out" / "sweep_rho_GC.csv")), 4u);
}

TEST(Cli, Table1FillsFifteenCellsAndMarksFailures) {
  const auto dir = scratch("table1");
  const json models = json::array({
      {{"family", "LR"}, {"hyperparams", json::object()}},
      {{"family", "LRL2"}, {"hyperparams", {{"lambda", 0.01}}}},
      {{"family", "FLR"}, {"eta_fraction", 0.5}, {"hyperparams", json::object()}},
      {{"family", "DRLR"}, {"hyperparams", {{"rho", 0.01}, {"kappa_y", 0.4}}}},
      {{"family", "DRFLR"}, {"eta_fraction", 0.5}, {"hyperparams", {{"rho", 0.01}, {"kappa_s", 0.4}, {"kappa_y", 0.4}}}},
  });
  const json broken = {{"id", "BROKEN"}, {"path", "absent.csv"}, {"schema", (fs::path(RFS_CONFIG_DIR) / ".." / "data" / "german_credit.schema.json").string()}};
  const auto r = run("table1", write_config(dir, {{"dataset", json::array({gc_dataset(), broken})},
                                                  {"models", models},
                                                  {"experiment", {{"kind", "table1"}}}}));
  ASSERT_EQ(r.code, 0) << r.output;
  std::istringstream csv(slurp(dir / "out" / "table1.csv"));
  std::string line;
  std::getline(csv, line);
  EXPECT_EQ(line, "metric,model,GC,BROKEN");
  int rows = 0;
  while (std::getline(csv, line)) {
    ++rows;
    EXPECT_EQ(line.substr(line.rfind(',') + 1), "NA") << line;
    EXPECT_EQ(line.find("NA,NA"), std::string::npos) << line;
  }
  EXPECT_EQ(rows, 15);
}

TEST(Config, ParsesAndRejects) {
  const auto cfg = rfs::cli::RunConfig::from_json(json::parse(R"({
    "dataset": {"id": "GC"},
    "model": {"family": "DRFLR", "grid": {"rho": [0.01, 0.1], "kappa_s": 0.4}, "eta_fraction": 0.5},
    "eval": {"k": 3, "seed": 7}
  })"));
  ASSERT_EQ(cfg.models.size(), 1u);
  EXPECT_EQ(cfg.eval.k, 3);
  EXPECT_EQ(cfg.models[0].eta_rule.fraction, 0.5);
  EXPECT_THROW(rfs::cli::RunConfig::from_json(json::parse(R"({"dataset": {"id": "GC"}, "eval": {"k": 1}})")),
               rfs::ConfigError);
  EXPECT_THROW(rfs::cli::RunConfig::from_json(json::parse(R"({"dataset": {"id": "GC", "path": "x.csv"}})")),
               rfs::ConfigError);
}

TEST(Config, BundledExamplesParse) {
  int count = 0;
  for (const auto& entry : fs::directory_iterator(RFS_CONFIG_DIR)) {
    if (entry.path().extension() != ".json") continue;
    EXPECT_NO_THROW(rfs::cli::RunConfig::load(entry.path())) << entry.path();
    ++count;
  }
  EXPECT_GE(count, 8);
}
