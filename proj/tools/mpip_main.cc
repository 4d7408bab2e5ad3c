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


#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "commands.h"
#include "mpip/config.h"
#include "mpip/errors.h"

namespace fs = std::filesystem;
using namespace mpip;

namespace {

void ConfigureLogging() {
  auto logger = spdlog::stderr_color_mt("mpip");
  logger->set_pattern("[%l] %v");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::info);
  const char* env = std::getenv("MPIP_LOG_LEVEL");
  if (env == nullptr) return;
  const std::string level = env;
  if (level == "error") {
    spdlog::set_level(spdlog::level::err);
  } else if (level == "warn") {
    spdlog::set_level(spdlog::level::warn);
  } else if (level == "info") {
    spdlog::set_level(spdlog::level::info);
  } else if (level == "debug") {
    spdlog::set_level(spdlog::level::debug);
  } else {
    spdlog::warn("ignoring MPIP_LOG_LEVEL='{}' (use error, warn, info or debug)",
                 level);
  }
}

}  // namespace

int main(int argc, char** argv) {
  ConfigureLogging();

  CLI::App app{"Model-predictive interaction primitives"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> objective;
  std::optional<double> horizon_x;
  std::optional<double> horizon_u;
  std::string out;
  app.add_option("--config", config_path, "JSON config file")->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "Master seed");
  app.add_option("--objective", objective, "Control objective")
      ->check(CLI::IsMember({"reduce", "increase", "symmetry", "reactive", "passive"}));
  app.add_option("--horizon-x", horizon_x, "Target horizon (phase)");
  app.add_option("--horizon-u", horizon_u, "Control horizon (phase)");
  app.add_option("--out", out, "Output path");

  auto* generate = app.add_subcommand("generate", "Write a synthetic session");
  std::optional<int> strides;
  generate->add_option("--strides", strides, "Number of strides");

  auto* train = app.add_subcommand("train", "Train a model from a session manifest");
  std::string manifest;
  train->add_option("manifest", manifest, "Session manifest")->required();

  auto* run = app.add_subcommand("run", "Filter and control trials");
  std::string model_path;
  std::string recording;
  std::optional<int> trials;
  run->add_option("model", model_path, "Model file")->required();
  run->add_option("--recording", recording, "Replay this session manifest");
  run->add_option("--trials", trials, "Number of live trials");

  auto* evaluate = app.add_subcommand("evaluate", "Aggregate run metrics");
  std::vector<std::string> inputs;
  evaluate->add_option("metrics", inputs, "metrics.json files or run directories")
      ->required();

  auto* bench = app.add_subcommand("bench", "Measure control-step latency");
  std::string bench_model;
  bench->add_option("model", bench_model, "Model file (default: train one)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? cli::kExitOk : cli::kExitConfig;
  }

  try {
    const nlohmann::json file =
        config_path.empty() ? nlohmann::json::object() : LoadJsonFile(config_path);
    cli::Settings settings =
        cli::ResolveSettings(file, {seed, objective, horizon_x, horizon_u});
    if (strides) settings.strides = *strides;
    if (trials) settings.trials = *trials;
    if (settings.strides < 1 || settings.trials < 1) {
      throw ConfigError("strides and trials must be >= 1");
    }

    if (generate->parsed()) {
      cli::Generate(settings, out.empty() ? fs::path("data") : fs::path(out));
    } else if (train->parsed()) {
      cli::TrainFromManifest(settings, manifest,
                             out.empty() ? fs::path("model.json") : fs::path(out));
    } else if (run->parsed()) {
      const auto summary = cli::Run(
          settings, model_path,
          recording.empty() ? std::nullopt : std::optional<fs::path>(recording),
          out.empty() ? fs::path("run") : fs::path(out));
      std::cout << cli::FormatTable(cli::Aggregate({summary}));
      if (summary.plan_violations > 0) return cli::kExitNumerical;
    } else if (evaluate->parsed()) {
      std::vector<fs::path> paths(inputs.begin(), inputs.end());
      std::cout << cli::FormatTable(cli::Evaluate(paths, out));
    } else if (bench->parsed()) {
      const auto report = cli::Bench(
          settings,
          bench_model.empty() ? std::nullopt : std::optional<fs::path>(bench_model),
          out);
      std::cout << cli::FormatBench(report);
    }
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return cli::ExitCodeFor(e);
  }
  return cli::kExitOk;
}
