// Copyright 2026 The MPIP Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "commands.h"
#include "mpip/errors.h"
#include "mpip/model.h"

namespace mpip::cli {
namespace {

namespace fs = std::filesystem;

std::string ReadAll(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

void WriteAll(const fs::path& path, const std::string& text) {
  std::ofstream(path, std::ios::binary) << text;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("mpip_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    // a small, fast configuration
    nlohmann::json config = {
        {"seed", 5},
        {"world", {{"noise_std", 0.01}}},
        {"generate", {{"strides", 6}}},
        {"train", {{"ridge", 0.1}}},
        {"run", {{"trials", 2}, {"covariance_ridge", 0.01}}},
        {"bench", {{"steps", 40}, {"demonstrations", 4}, {"basis_per_channel", 8}, {"channels", 6}}}};
    WriteAll(dir_ / "small.json", config.dump());
  }
  void TearDown() override { fs::remove_all(dir_); }

  // Runs the CLI with arguments, returns its exit status.
  int Cli(const std::string& args, const std::string& env = "MPIP_LOG_LEVEL=error") const {
    const std::string command = env + " " + MPIP_CLI_PATH + " " + args + " > " +
                                (dir_ / "stdout.txt").string() + " 2> " +
                                (dir_ / "stderr.txt").string();
    const int status = std::system(command.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  std::string Small() const { return "--config " + (dir_ / "small.json").string(); }

  fs::path dir_;
};

TEST_F(CliTest, GenerateIsByteReproducible) {
  ASSERT_EQ(Cli(Small() + " --out " + (dir_ / "a").string() + " generate"), 0);
  ASSERT_EQ(Cli(Small() + " --out " + (dir_ / "b").string() + " generate"), 0);
  for (const auto& entry : fs::directory_iterator(dir_ / "a")) {
    EXPECT_EQ(ReadAll(entry.path()), ReadAll(dir_ / "b" / entry.path().filename()))
        << entry.path();
  }
  EXPECT_EQ(ReadManifest(dir_ / "a" / "manifest.json").demonstrations.size(), 6u);
  ASSERT_EQ(Cli(Small() + " --seed 6 --out " + (dir_ / "c").string() + " generate"), 0);
  EXPECT_NE(ReadAll(dir_ / "a" / "stride_000.csv"), ReadAll(dir_ / "c" / "stride_000.csv"));
}

TEST_F(CliTest, LogLevelFromEnvironment) {
  const std::string args = Small() + " --out " + (dir_ / "d").string() + " generate --strides 1";
  ASSERT_EQ(Cli(args, "MPIP_LOG_LEVEL=error"), 0);
  EXPECT_TRUE(ReadAll(dir_ / "stderr.txt").empty());
  ASSERT_EQ(Cli(args, "MPIP_LOG_LEVEL=info"), 0);
  EXPECT_NE(ReadAll(dir_ / "stderr.txt").find("generating"), std::string::npos);
  ASSERT_EQ(Cli(args, "MPIP_LOG_LEVEL=loud"), 0);
  EXPECT_NE(ReadAll(dir_ / "stderr.txt").find("MPIP_LOG_LEVEL"), std::string::npos);
}

TEST_F(CliTest, GenerateSingleStride) {
  ASSERT_EQ(Cli(Small() + " --out " + (dir_ / "one").string() + " generate --strides 1"), 0);
  int csv = 0;
  for (const auto& entry : fs::directory_iterator(dir_ / "one")) {
    csv += entry.path().extension() == ".csv";
  }
  EXPECT_EQ(csv, 1);
}

TEST_F(CliTest, ConfigErrorsExitWithConfigCode) {
  WriteAll(dir_ / "bad.json", R"({"world": {"coupling_gain": -1}})");
  EXPECT_EQ(Cli("--config " + (dir_ / "bad.json").string() + " generate"), kExitConfig);
  EXPECT_FALSE(ReadAll(dir_ / "stderr.txt").empty());
  WriteAll(dir_ / "bad.json", R"({"wrold": {}})");
  EXPECT_EQ(Cli("--config " + (dir_ / "bad.json").string() + " generate"), kExitConfig);
  WriteAll(dir_ / "bad.json", "{ broken");
  EXPECT_EQ(Cli("--config " + (dir_ / "bad.json").string() + " generate"), kExitConfig);
  EXPECT_EQ(Cli("--config " + (dir_ / "missing.json").string() + " generate"), kExitConfig);
  EXPECT_EQ(Cli("--objective sideways generate"), kExitConfig);
  EXPECT_EQ(Cli("--horizon-x 2 generate"), kExitConfig);
  EXPECT_EQ(Cli("fly"), kExitConfig);
  EXPECT_EQ(Cli("--help"), kExitOk);
}

TEST_F(CliTest, TrainRoundTripAndMinimumSet) {
  ASSERT_EQ(Cli(Small() + " --out " + (dir_ / "data").string() + " generate --strides 2"), 0);
  ASSERT_EQ(Cli(Small() + " --out " + (dir_ / "m.json").string() + " train " +
                (dir_ / "data" / "manifest.json").string()),
            0);
  const IPModel model = LoadModel(dir_ / "m.json");
  EXPECT_EQ(model.ensemble_size(), 2);
  EXPECT_EQ(SerializeModel(model), ReadAll(dir_ / "m.json"));
  EXPECT_TRUE(fs::exists(dir_ / "m.json.config.json"));
  // retraining is byte-identical
  ASSERT_EQ(Cli(Small() + " --out " + (dir_ / "m2.json").string() + " train " +
                (dir_ / "data" / "manifest.json").string()),
            0);
  EXPECT_EQ(ReadAll(dir_ / "m.json"), ReadAll(dir_ / "m2.json"));

  ASSERT_EQ(Cli(Small() + " --out " + (dir_ / "one").string() + " generate --strides 1"), 0);
  EXPECT_NE(Cli(Small() + " --out " + (dir_ / "m1.json").string() + " train " +
                (dir_ / "one" / "manifest.json").string()),
            0);
}

TEST_F(CliTest, FormatAndNumericalErrorCodes) {
  WriteAll(dir_ / "manifest.json", R"({"sample_rate": 100, "demonstrations": ["x.csv"]})");
  WriteAll(dir_ / "x.csv", "a,b\nobserved,control\n1,2\n3,oops\n");
  EXPECT_EQ(Cli("train " + (dir_ / "manifest.json").string()), kExitFormat);
  EXPECT_NE(ReadAll(dir_ / "stderr.txt").find("oops"), std::string::npos);
  WriteAll(dir_ / "model.json", "{\"format\": \"mpip-model\"}");
  EXPECT_EQ(Cli("run " + (dir_ / "model.json").string()), kExitFormat);

  // unregularized fit with bumps far narrower than the sample spacing
  ASSERT_EQ(Cli(Small() + " --out " + (dir_ / "data").string() + " generate --strides 3"), 0);
  WriteAll(dir_ / "narrow.json", R"({"train": {"ridge": 0, "basis_width": 1e-5}})");
  EXPECT_EQ(Cli("--config " + (dir_ / "narrow.json").string() + " --out " +
                (dir_ / "n.json").string() + " train " + (dir_ / "data" / "manifest.json").string()),
            kExitNumerical);
}

TEST_F(CliTest, RunLogsRespectPlanInvariant) {
  ASSERT_EQ(Cli(Small() + " --out " + (dir_ / "data").string() + " generate"), 0);
  ASSERT_EQ(Cli(Small() + " --out " + (dir_ / "m.json").string() + " train " +
                (dir_ / "data" / "manifest.json").string()),
            0);
  for (const char* mode : {"reduce", "reactive", "increase", "symmetry", "passive"}) {
    const fs::path out = dir_ / mode;
    ASSERT_EQ(Cli(Small() + " --objective " + mode + " --out " + out.string() + " run " +
                  (dir_ / "m.json").string()),
              0)
        << mode << ReadAll(dir_ / "stderr.txt");
    std::ifstream ticks(out / "ticks.jsonl");
    std::string line;
    int count = 0;
    while (std::getline(ticks, line)) {
      const auto j = nlohmann::json::parse(line);
      EXPECT_LE(j["J"].get<double>(), j["J_reactive"].get<double>() + 1e-12);
      EXPECT_TRUE(j["plan_ok"].get<bool>());
      if (std::string(mode) == "reactive") EXPECT_EQ(j["J"], j["J_reactive"]);
      ++count;
    }
    EXPECT_GT(count, 100);
    const auto metrics = nlohmann::json::parse(ReadAll(out / "metrics.json"));
    EXPECT_EQ(metrics["mode"], mode);
    EXPECT_EQ(metrics["trials"].size(), 2u);
    EXPECT_EQ(metrics["session"]["plan_violations"], 0);
    EXPECT_TRUE(fs::exists(out / "config.json"));
  }
  // identical config and seed reproduce the log byte for byte
  ASSERT_EQ(Cli(Small() + " --objective reduce --out " + (dir_ / "again").string() + " run " +
                (dir_ / "m.json").string()),
            0);
  EXPECT_EQ(ReadAll(dir_ / "reduce" / "ticks.jsonl"), ReadAll(dir_ / "again" / "ticks.jsonl"));
  EXPECT_EQ(ReadAll(dir_ / "reduce" / "metrics.json"), ReadAll(dir_ / "again" / "metrics.json"));

  // recorded replay
  ASSERT_EQ(Cli(Small() + " --out " + (dir_ / "rec").string() + " run " +
                (dir_ / "m.json").string() + " --recording " +
                (dir_ / "data" / "manifest.json").string()),
            0);
  EXPECT_EQ(nlohmann::json::parse(ReadAll(dir_ / "rec" / "metrics.json"))["trials"].size(), 6u);
}

nlohmann::json TrialJson(const std::string& id, double impulse, double peak) {
  return {{"trial_id", id},
          {"mode", "reduce"},
          {"impulse", {{"knee_force", impulse}}},
          {"peak", {{"knee_force", peak}}},
          {"value_at_event", {{"knee_force", peak / 2}}},
          {"stability_exponent", nullptr}};
}

TEST_F(CliTest, EvaluateArithmetic) {
  nlohmann::json metrics = {{"format", "mpip-metrics"},
                            {"version", 1},
                            {"mode", "reduce"},
                            {"trials", {TrialJson("t0", 1.0, 2.0), TrialJson("t1", 3.0, 5.0)}},
                            {"session", {{"stability_exponent", 0.25}}}};
  WriteAll(dir_ / "two.json", metrics.dump());
  ASSERT_EQ(Cli("--out " + (dir_ / "eval").string() + " evaluate " + (dir_ / "two.json").string()),
            0);
  const auto summary = nlohmann::json::parse(ReadAll(dir_ / "eval" / "summary.json"));
  const auto& m = summary["modes"]["reduce"];
  EXPECT_DOUBLE_EQ(m["impulse.knee_force"]["mean"].get<double>(), 2.0);
  EXPECT_DOUBLE_EQ(m["impulse.knee_force"]["std"].get<double>(), std::sqrt(2.0));
  EXPECT_DOUBLE_EQ(m["peak.knee_force"]["mean"].get<double>(), 3.5);
  EXPECT_DOUBLE_EQ(m["peak.knee_force"]["std"].get<double>(), std::sqrt(4.5));
  EXPECT_EQ(m["stability_exponent"]["count"], 1);
  EXPECT_NE(ReadAll(dir_ / "eval" / "summary.txt").find("impulse.knee_force"),
            std::string::npos);
  EXPECT_NE(ReadAll(dir_ / "stdout.txt").find("reduce"), std::string::npos);

  // permuted trial order gives identical aggregates
  std::swap(metrics["trials"][0], metrics["trials"][1]);
  WriteAll(dir_ / "swapped.json", metrics.dump());
  ASSERT_EQ(Cli("--out " + (dir_ / "eval2").string() + " evaluate " +
                (dir_ / "swapped.json").string()),
            0);
  EXPECT_EQ(ReadAll(dir_ / "eval" / "summary.json"), ReadAll(dir_ / "eval2" / "summary.json"));

  // single trial has a zero std column
  metrics["trials"].erase(1);
  WriteAll(dir_ / "one.json", metrics.dump());
  ASSERT_EQ(Cli("--out " + (dir_ / "eval3").string() + " evaluate " + (dir_ / "one.json").string()),
            0);
  const auto single = nlohmann::json::parse(ReadAll(dir_ / "eval3" / "summary.json"));
  for (const auto& [name, s] : single["modes"]["reduce"].items()) {
    EXPECT_EQ(s["std"].get<double>(), 0.0) << name;
  }

  WriteAll(dir_ / "junk.json", R"({"format": "other"})");
  EXPECT_EQ(Cli("evaluate " + (dir_ / "junk.json").string()), kExitFormat);
}

TEST_F(CliTest, AggregateInProcess) {
  RunSummary a, b;
  a.mode = b.mode = "reactive";
  TrialMetrics t;
  t.impulse["f"] = 1.0;
  a.trials = {t};
  t.impulse["f"] = 4.0;
  b.trials = {t};
  a.stability_exponent = b.stability_exponent = std::nan("");
  const AggregateTable table = Aggregate({a, b});
  EXPECT_DOUBLE_EQ(table.at("reactive").at("impulse.f").mean, 2.5);
  EXPECT_EQ(table.at("reactive").count("stability_exponent"), 0u);
  const RunSummary back = MetricsFromJson(nlohmann::json::parse(MetricsToJson(a).dump()));
  EXPECT_EQ(back.trials[0].impulse.at("f"), 1.0);
  EXPECT_TRUE(std::isnan(back.stability_exponent));
}

TEST_F(CliTest, BenchReportsStagesAndStableStepCounts) {
  ASSERT_EQ(Cli(Small() + " --out " + (dir_ / "b1").string() + " bench"), 0);
  ASSERT_EQ(Cli(Small() + " --out " + (dir_ / "b2").string() + " bench"), 0);
  const auto r1 = nlohmann::json::parse(ReadAll(dir_ / "b1" / "bench.json"));
  const auto r2 = nlohmann::json::parse(ReadAll(dir_ / "b2" / "bench.json"));
  EXPECT_EQ(r1["steps"], 40);
  EXPECT_EQ(r1["steps"], r2["steps"]);
  for (const char* stage : {"predict", "update", "optimize", "output", "total"}) {
    EXPECT_TRUE(r1["stages"].contains(stage)) << stage;
    EXPECT_GE(r1["stages"][stage]["p95_ms"].get<double>(),
              r1["stages"][stage]["p50_ms"].get<double>());
  }
  EXPECT_EQ(r1["ensemble_size"], 4);
  EXPECT_EQ(r1["channels"], 6);
}

TEST(PercentileTest, NearestRank) {
  EXPECT_EQ(Percentile({5.0, 1.0, 3.0, 2.0, 4.0}, 50.0), 3.0);
  EXPECT_EQ(Percentile({1.0, 2.0, 3.0, 4.0}, 95.0), 4.0);
  EXPECT_EQ(Percentile({7.0}, 95.0), 7.0);
  EXPECT_THROW(Percentile({}, 50.0), DomainError);
}

TEST(ExitCodeTest, ErrorClassesMapToDistinctCodes) {
  EXPECT_EQ(ExitCodeFor(ConfigError("x")), kExitConfig);
  EXPECT_EQ(ExitCodeFor(FormatError("x")), kExitFormat);
  EXPECT_EQ(ExitCodeFor(NumericalError("x")), kExitNumerical);
  EXPECT_EQ(ExitCodeFor(std::runtime_error("x")), kExitFailure);
}

TEST(SettingsTest, FlagsOverrideFile) {
  const nlohmann::json file = {{"seed", 3}, {"run", {{"objective", "increase"}, {"trials", 7}}}};
  Overrides flags;
  flags.objective = "symmetry";
  flags.horizon_x = 0.5;
  flags.seed = 9;
  const Settings s = ResolveSettings(file, flags);
  EXPECT_EQ(s.run.mode, ControlMode::kSymmetry);
  EXPECT_EQ(s.run.horizon_x, 0.5);
  EXPECT_EQ(s.seed, 9u);
  EXPECT_EQ(s.train.seed, 9u);
  EXPECT_EQ(s.trials, 7);
  const Settings again = ResolveSettings(nlohmann::json::parse(s.ToJson().dump()), {});
  EXPECT_EQ(again.ToJson(), s.ToJson());
}

}  // namespace
}  // namespace mpip::cli
