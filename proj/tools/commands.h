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


// Subcommand implementations behind the mpip executable. Each command takes
// fully resolved settings so it can be driven from tests without a process.

#ifndef MPIP_TOOLS_COMMANDS_H_
#define MPIP_TOOLS_COMMANDS_H_

#include <cstdint>
#include <exception>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mpip/harness.h"
#include "mpip/metrics.h"
#include "mpip/model.h"
#include "mpip/synth.h"

namespace mpip::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitConfig = 2,
  kExitFormat = 3,
  kExitNumerical = 4,
};

int ExitCodeFor(const std::exception& error);

struct BenchSettings {
  int steps = 1000;
  int demonstrations = 20;  // also the ensemble size
  int basis_per_channel = 15;
  int channels = 10;        // observed channels = channels - 2
};

struct Settings {
  std::uint64_t seed = 1;
  WorldConfig world;
  int strides = 60;
  TrainConfig train;
  ExperimentConfig run;
  int trials = 50;
  BenchSettings bench;

  nlohmann::ordered_json ToJson() const;
};

// Flags given on the command line; each one overrides the config file.
struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> objective;
  std::optional<double> horizon_x;
  std::optional<double> horizon_u;
};

Settings ResolveSettings(const nlohmann::json& file, const Overrides& flags);

// Writes stride CSVs, manifest.json and config.json; returns the manifest path.
std::filesystem::path Generate(const Settings& settings,
                               const std::filesystem::path& out_dir);

// Trains from a session manifest and saves the model (plus a sidecar
// <model>.config.json with the effective settings).
IPModel TrainFromManifest(const Settings& settings,
                          const std::filesystem::path& manifest,
                          const std::filesystem::path& out_model);

struct RunSummary {
  std::string mode;
  std::vector<TrialMetrics> trials;
  double stability_exponent = 0.0;
  int plan_violations = 0;
  int ticks = 0;
};

// Live closed loop on the configured world, or a replay of every
// demonstration in `recording` when given. Writes ticks.jsonl, metrics.json
// and config.json into out_dir.
RunSummary Run(const Settings& settings, const std::filesystem::path& model_path,
               const std::optional<std::filesystem::path>& recording,
               const std::filesystem::path& out_dir);

nlohmann::ordered_json MetricsToJson(const RunSummary& summary);
RunSummary MetricsFromJson(const nlohmann::json& j);

// mode -> metric name ("impulse.knee_force", ...) -> statistics
using AggregateTable = std::map<std::string, std::map<std::string, MeanStd>>;

AggregateTable Aggregate(const std::vector<RunSummary>& runs);
std::string FormatTable(const AggregateTable& table);
nlohmann::ordered_json TableToJson(const AggregateTable& table);

// Reads metrics.json files (or run directories containing one), writes
// summary.txt and summary.json into out_dir when it is non-empty.
AggregateTable Evaluate(const std::vector<std::filesystem::path>& inputs,
                        const std::filesystem::path& out_dir);

struct StageStats {
  double p50_ms = 0.0;
  double p95_ms = 0.0;
  double mean_ms = 0.0;
};

struct BenchReport {
  int steps = 0;
  int ensemble_size = 0;
  int basis_per_channel = 0;
  int channels = 0;
  std::map<std::string, StageStats> stages;  // predict, update, optimize, output, total
  double steps_per_second = 0.0;
  int plan_violations = 0;
};

// Nearest-rank percentile, p in (0, 100].
double Percentile(std::vector<double> values, double p);

BenchReport Bench(const Settings& settings,
                  const std::optional<std::filesystem::path>& model_path,
                  const std::filesystem::path& out_dir);

nlohmann::ordered_json ToJson(const BenchReport& report);
std::string FormatBench(const BenchReport& report);

}  // namespace mpip::cli

#endif  // MPIP_TOOLS_COMMANDS_H_
