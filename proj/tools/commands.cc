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


#include "commands.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <set>
#include <span>

#include <spdlog/spdlog.h>

#include "mpip/config.h"
#include "mpip/dataset.h"
#include "mpip/errors.h"

namespace mpip::cli {
namespace fs = std::filesystem;
namespace {

using Json = nlohmann::ordered_json;

constexpr std::uint64_t kRunStream = 0x72756e;
constexpr std::uint64_t kBenchStream = 0x62656e6368;

void CheckKeys(const nlohmann::json& j, const std::set<std::string>& allowed,
               const std::string& section) {
  if (!j.is_object()) throw ConfigError(section + " must be an object");
  for (const auto& item : j.items()) {
    if (!allowed.count(item.key())) {
      throw ConfigError("unknown key '" + item.key() + "' in " + section);
    }
  }
}

template <typename T>
T Get(const nlohmann::json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config key '") + key + "': " + e.what());
  }
}

void WriteText(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw Error("write failed for '" + path.string() + "'");
}

void PrepareDirectory(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error("cannot create '" + dir.string() + "': " + ec.message());
}

Json NullableDouble(double v) {
  return std::isfinite(v) ? Json(v) : Json(nullptr);
}

double ReadNullable(const nlohmann::json& j) {
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

Json TickToJson(const TickRecord& t) {
  Json j;
  j["trial"] = t.trial;
  j["tick"] = t.tick;
  j["phase_true"] = t.phase_true;
  j["phase"] = t.phase_estimate;
  j["u"] = t.control;
  j["u_next"] = t.next_control;
  j["J"] = t.cost_achieved;
  j["J_reactive"] = t.cost_reactive;
  j["iterations"] = t.iterations;
  j["fallback"] = t.fallback;
  j["plan_ok"] = t.plan_ok;
  j["force_true"] = t.force_true;
  j["force_pred"] = t.force_predicted;
  j["force_pred_std"] = t.force_predicted_std;
  return j;
}

Json TrialToJson(const TrialMetrics& m) {
  Json j;
  j["trial_id"] = m.trial_id;
  j["mode"] = m.mode;
  for (const char* key : {"impulse", "peak", "value_at_event"}) {
    const auto& values = std::string(key) == "impulse" ? m.impulse
                         : std::string(key) == "peak"  ? m.peak
                                                       : m.value_at_event;
    Json block = Json::object();
    for (const auto& [name, v] : values) block[name] = NullableDouble(v);
    j[key] = block;
  }
  j["stability_exponent"] = NullableDouble(m.stability_exponent);
  return j;
}

TrialMetrics TrialFromJson(const nlohmann::json& j) {
  TrialMetrics m;
  m.trial_id = j.at("trial_id").get<std::string>();
  m.mode = j.at("mode").get<std::string>();
  for (const auto& [name, v] : j.at("impulse").items()) m.impulse[name] = ReadNullable(v);
  for (const auto& [name, v] : j.at("peak").items()) m.peak[name] = ReadNullable(v);
  for (const auto& [name, v] : j.at("value_at_event").items()) {
    m.value_at_event[name] = ReadNullable(v);
  }
  if (j.contains("stability_exponent")) {
    m.stability_exponent = ReadNullable(j.at("stability_exponent"));
  }
  return m;
}

double SessionStability(const std::vector<double>& series) {
  try {
    return LyapunovExponent(series);
  } catch (const DomainError& e) {
    spdlog::warn("stability exponent unavailable: {}", e.what());
    return std::numeric_limits<double>::quiet_NaN();
  }
}

std::string FormatNumber(double v) {
  if (!std::isfinite(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace

int ExitCodeFor(const std::exception& error) {
  if (dynamic_cast<const ConfigError*>(&error)) return kExitConfig;
  if (dynamic_cast<const DomainError*>(&error)) return kExitConfig;
  if (dynamic_cast<const FormatError*>(&error)) return kExitFormat;
  if (dynamic_cast<const NumericalError*>(&error)) return kExitNumerical;
  return kExitFailure;
}

nlohmann::ordered_json Settings::ToJson() const {
  Json j;
  j["seed"] = seed;
  j["world"] = mpip::ToJson(world);
  j["generate"] = {{"strides", strides}};
  j["train"] = mpip::ToJson(train);
  Json r = mpip::ToJson(run);
  r["trials"] = trials;
  j["run"] = r;
  j["bench"] = {{"steps", bench.steps},
                {"demonstrations", bench.demonstrations},
                {"basis_per_channel", bench.basis_per_channel},
                {"channels", bench.channels}};
  return j;
}

Settings ResolveSettings(const nlohmann::json& file, const Overrides& flags) {
  Settings s;
  const nlohmann::json empty = nlohmann::json::object();
  const nlohmann::json& f = file.is_null() ? empty : file;
  CheckKeys(f, {"seed", "world", "generate", "train", "run", "bench"}, "config");
  s.seed = Get<std::uint64_t>(f, "seed", s.seed);
  if (f.contains("world")) s.world = WorldConfigFromJson(f.at("world"));
  if (f.contains("generate")) {
    CheckKeys(f.at("generate"), {"strides"}, "generate");
    s.strides = Get<int>(f.at("generate"), "strides", s.strides);
  }
  s.train.seed = s.seed;
  if (f.contains("train")) s.train = TrainConfigFromJson(f.at("train"), s.train);
  if (f.contains("run")) {
    nlohmann::json run = f.at("run");
    if (!run.is_object()) throw ConfigError("run must be an object");
    s.trials = Get<int>(run, "trials", s.trials);
    run.erase("trials");
    s.run = ExperimentConfigFromJson(run);
  }
  if (f.contains("bench")) {
    const auto& b = f.at("bench");
    CheckKeys(b, {"steps", "demonstrations", "basis_per_channel", "channels"},
              "bench");
    s.bench.steps = Get<int>(b, "steps", s.bench.steps);
    s.bench.demonstrations = Get<int>(b, "demonstrations", s.bench.demonstrations);
    s.bench.basis_per_channel =
        Get<int>(b, "basis_per_channel", s.bench.basis_per_channel);
    s.bench.channels = Get<int>(b, "channels", s.bench.channels);
  }

  if (flags.seed) {
    s.seed = *flags.seed;
    if (!f.contains("train") || !f.at("train").contains("seed")) s.train.seed = s.seed;
  }
  if (flags.objective) s.run.mode = ParseControlMode(*flags.objective);
  if (flags.horizon_x) s.run.horizon_x = *flags.horizon_x;
  if (flags.horizon_u) s.run.horizon_u = *flags.horizon_u;

  if (s.strides < 1) throw ConfigError("strides must be >= 1");
  if (s.trials < 1) throw ConfigError("trials must be >= 1");
  if (!(s.run.horizon_x >= 0.0 && s.run.horizon_x <= 1.0) ||
      !(s.run.horizon_u >= 0.0 && s.run.horizon_u <= 1.0)) {
    throw ConfigError("horizons must lie in [0, 1]");
  }
  if (s.bench.steps < 1 || s.bench.demonstrations < 2 ||
      s.bench.basis_per_channel < 2 || s.bench.channels < 5) {
    throw ConfigError(
        "bench needs steps >= 1, demonstrations >= 2, basis_per_channel >= 2 "
        "and channels >= 5");
  }
  return s;
}

fs::path Generate(const Settings& settings, const fs::path& out_dir) {
  spdlog::info("generating {} {} strides (seed {})", settings.strides,
               ToString(settings.world.preset), settings.seed);
  const GeneratedSession session =
      GenerateSession(settings.world, settings.strides, settings.seed);
  const fs::path manifest = WriteSession(session, settings.world, out_dir);
  WriteText(out_dir / "config.json", settings.ToJson().dump(2) + "\n");
  spdlog::info("wrote {}", manifest.string());
  return manifest;
}

IPModel TrainFromManifest(const Settings& settings, const fs::path& manifest,
                          const fs::path& out_model) {
  const std::vector<Demonstration> demos = IngestSession(manifest);
  spdlog::info("training on {} demonstrations from {}", demos.size(),
               manifest.string());
  IPModel model = Train(demos, settings.train);
  if (out_model.has_parent_path()) PrepareDirectory(out_model.parent_path());
  SaveModel(out_model, model);
  fs::path sidecar = out_model;
  sidecar += ".config.json";
  Json config = settings.ToJson();
  config["dataset"] = manifest.generic_string();
  WriteText(sidecar, config.dump(2) + "\n");
  spdlog::info("model: E={} B={} -> {}", model.ensemble_size(),
               model.basis.layout().size(), out_model.string());
  return model;
}

nlohmann::ordered_json MetricsToJson(const RunSummary& summary) {
  Json j;
  j["format"] = "mpip-metrics";
  j["version"] = 1;
  j["mode"] = summary.mode;
  Json trials = Json::array();
  for (const auto& t : summary.trials) trials.push_back(TrialToJson(t));
  j["trials"] = trials;
  j["session"] = {{"stability_exponent", NullableDouble(summary.stability_exponent)},
                  {"plan_violations", summary.plan_violations},
                  {"ticks", summary.ticks}};
  return j;
}

RunSummary MetricsFromJson(const nlohmann::json& j) {
  try {
    if (j.value("format", "") != "mpip-metrics") {
      throw FormatError("not an mpip metrics document");
    }
    RunSummary s;
    s.mode = j.at("mode").get<std::string>();
    for (const auto& t : j.at("trials")) s.trials.push_back(TrialFromJson(t));
    if (j.contains("session")) {
      const auto& session = j.at("session");
      s.stability_exponent = ReadNullable(
          session.value("stability_exponent", nlohmann::json(nullptr)));
      s.plan_violations = session.value("plan_violations", 0);
      s.ticks = session.value("ticks", 0);
    } else {
      s.stability_exponent = std::numeric_limits<double>::quiet_NaN();
    }
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed metrics document: ") + e.what());
  }
}

RunSummary Run(const Settings& settings, const fs::path& model_path,
               const std::optional<fs::path>& recording, const fs::path& out_dir) {
  auto model = std::make_shared<const IPModel>(LoadModel(model_path));
  PrepareDirectory(out_dir);
  std::ofstream ticks(out_dir / "ticks.jsonl", std::ios::binary);
  if (!ticks) throw Error("cannot write ticks.jsonl in '" + out_dir.string() + "'");

  RunSummary summary;
  summary.mode = std::string(ToString(settings.run.mode));
  std::vector<double> stability_series;
  const std::uint64_t stream = DeriveSeed(settings.seed, kRunStream);

  auto consume = [&](const TrialResult& r, int stability_column) {
    for (const auto& t : r.ticks) ticks << TickToJson(t).dump() << '\n';
    summary.trials.push_back(r.metrics);
    summary.plan_violations += r.plan_violations;
    summary.ticks += static_cast<int>(r.ticks.size());
    if (stability_column >= 0) {
      for (Eigen::Index t = 0; t < r.observed.rows(); ++t) {
        stability_series.push_back(r.observed(t, stability_column));
      }
    }
  };

  if (recording) {
    const std::vector<Demonstration> demos = IngestSession(*recording);
    const std::vector<int> observed =
        ChannelsWithRole(model->channels, Role::kObserved);
    const int channel = model->ChannelIndex(settings.run.symmetry_channel);
    const auto it = std::find(observed.begin(), observed.end(), channel);
    const int column = it == observed.end()
                           ? 0
                           : static_cast<int>(it - observed.begin());
    spdlog::info("replaying {} recorded trials in {} mode", demos.size(),
                 summary.mode);
    for (std::size_t i = 0; i < demos.size(); ++i) {
      consume(RunRecordedTrial(model, settings.run, demos[i],
                               DeriveSeed(stream, 2 * i + 1),
                               static_cast<int>(i)),
              column);
    }
  } else {
    const World world(settings.world);
    const int channel = FindChannel(world.schema(), settings.run.symmetry_channel);
    const int column =
        channel >= 0 && channel < settings.world.num_observed ? channel : 0;
    spdlog::info("running {} live trials in {} mode", settings.trials, summary.mode);
    for (int i = 0; i < settings.trials; ++i) {
      Rng stride_rng(DeriveSeed(stream, 2 * static_cast<std::uint64_t>(i)));
      const StrideParams stride = world.SampleStride(stride_rng);
      const TrialResult r = RunClosedLoopTrial(
          world, model, settings.run, stride,
          DeriveSeed(stream, 2 * static_cast<std::uint64_t>(i) + 1), i);
      spdlog::debug("trial {}: impulse {} peak {}", i,
                    r.metrics.impulse.at(settings.run.target_channel),
                    r.metrics.peak.at(settings.run.target_channel));
      consume(r, column);
    }
  }
  ticks.close();
  if (!ticks) throw Error("write failed for ticks.jsonl");

  summary.stability_exponent = SessionStability(stability_series);
  if (summary.plan_violations > 0) {
    spdlog::error("{} plans violated the cost or box invariant",
                  summary.plan_violations);
  }
  WriteText(out_dir / "metrics.json", MetricsToJson(summary).dump(2) + "\n");
  Json config = settings.ToJson();
  config["model"] = model_path.generic_string();
  if (recording) config["recording"] = recording->generic_string();
  WriteText(out_dir / "config.json", config.dump(2) + "\n");
  return summary;
}

AggregateTable Aggregate(const std::vector<RunSummary>& runs) {
  std::map<std::string, std::map<std::string, std::vector<double>>> values;
  for (const auto& run : runs) {
    auto& per_mode = values[run.mode];
    for (const auto& t : run.trials) {
      for (const auto& [ch, v] : t.impulse) per_mode["impulse." + ch].push_back(v);
      for (const auto& [ch, v] : t.peak) per_mode["peak." + ch].push_back(v);
      for (const auto& [ch, v] : t.value_at_event) {
        per_mode["value_at_event." + ch].push_back(v);
      }
      if (std::isfinite(t.stability_exponent)) {
        per_mode["stability_exponent.trial"].push_back(t.stability_exponent);
      }
    }
    if (std::isfinite(run.stability_exponent)) {
      per_mode["stability_exponent"].push_back(run.stability_exponent);
    }
  }
  AggregateTable table;
  for (const auto& [mode, metrics] : values) {
    for (const auto& [name, v] : metrics) {
      table[mode][name] = Summarize(std::span<const double>(v));
    }
  }
  return table;
}

std::string FormatTable(const AggregateTable& table) {
  std::string out;
  char line[160];
  std::snprintf(line, sizeof line, "%-10s %-32s %14s %14s %6s\n", "mode",
                "metric", "mean", "std", "n");
  out += line;
  for (const auto& [mode, metrics] : table) {
    for (const auto& [name, s] : metrics) {
      std::snprintf(line, sizeof line, "%-10s %-32s %14s %14s %6d\n",
                    mode.c_str(), name.c_str(), FormatNumber(s.mean).c_str(),
                    FormatNumber(s.stddev).c_str(), s.count);
      out += line;
    }
  }
  return out;
}

nlohmann::ordered_json TableToJson(const AggregateTable& table) {
  Json modes = Json::object();
  for (const auto& [mode, metrics] : table) {
    Json m = Json::object();
    for (const auto& [name, s] : metrics) {
      m[name] = {{"mean", s.mean}, {"std", s.stddev}, {"count", s.count}};
    }
    modes[mode] = m;
  }
  Json j;
  j["format"] = "mpip-summary";
  j["modes"] = modes;
  return j;
}

AggregateTable Evaluate(const std::vector<fs::path>& inputs, const fs::path& out_dir) {
  if (inputs.empty()) throw ConfigError("evaluate needs at least one metrics file");
  std::vector<RunSummary> runs;
  for (const auto& input : inputs) {
    const fs::path file = fs::is_directory(input) ? input / "metrics.json" : input;
    std::ifstream in(file);
    if (!in) throw FormatError("cannot open metrics '" + file.string() + "'");
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
      throw FormatError("invalid JSON in '" + file.string() + "': " + e.what());
    }
    runs.push_back(MetricsFromJson(j));
  }
  const AggregateTable table = Aggregate(runs);
  if (!out_dir.empty()) {
    PrepareDirectory(out_dir);
    WriteText(out_dir / "summary.txt", FormatTable(table));
    WriteText(out_dir / "summary.json", TableToJson(table).dump(2) + "\n");
  }
  return table;
}

double Percentile(std::vector<double> values, double p) {
  if (values.empty()) throw DomainError("percentile of an empty sample");
  if (!(p > 0.0 && p <= 100.0)) throw DomainError("percentile must be in (0, 100]");
  std::sort(values.begin(), values.end());
  const auto rank = static_cast<std::size_t>(
      std::ceil(p / 100.0 * static_cast<double>(values.size())));
  return values[std::max<std::size_t>(rank, 1) - 1];
}

BenchReport Bench(const Settings& settings, const std::optional<fs::path>& model_path,
                  const fs::path& out_dir) {
  WorldConfig world_config = settings.world;
  std::shared_ptr<const IPModel> model;
  if (model_path) {
    model = std::make_shared<const IPModel>(LoadModel(*model_path));
    world_config.num_observed = static_cast<int>(
        ChannelsWithRole(model->channels, Role::kObserved).size());
  } else {
    world_config.num_observed = settings.bench.channels - 2;
    TrainConfig train = settings.train;
    train.basis_per_channel = settings.bench.basis_per_channel;
    train.ensemble_size = 0;
    const GeneratedSession session =
        GenerateSession(world_config, settings.bench.demonstrations,
                        DeriveSeed(settings.seed, kBenchStream));
    model = std::make_shared<const IPModel>(Train(session.demos, train));
  }
  const World world(world_config);

  BenchReport report;
  report.ensemble_size = model->ensemble_size();
  report.basis_per_channel = model->basis.layout().block_size(0);
  report.channels = model->num_channels();
  std::map<std::string, std::vector<double>> samples;
  const std::uint64_t stream = DeriveSeed(settings.seed, kBenchStream + 1);
  spdlog::info("benchmarking {} steps (E={}, B={}, D={})", settings.bench.steps,
               report.ensemble_size, report.basis_per_channel, report.channels);
  for (std::uint64_t trial = 0; report.steps < settings.bench.steps; ++trial) {
    Rng stride_rng(DeriveSeed(stream, 2 * trial));
    const StrideParams stride = world.SampleStride(stride_rng);
    const TrialResult r =
        RunClosedLoopTrial(world, model, settings.run, stride,
                           DeriveSeed(stream, 2 * trial + 1), static_cast<int>(trial));
    for (const auto& t : r.ticks) {
      if (report.steps >= settings.bench.steps) break;
      samples["predict"].push_back(t.timing.predict_ms);
      samples["update"].push_back(t.timing.update_ms);
      samples["optimize"].push_back(t.timing.optimize_ms);
      samples["output"].push_back(t.timing.output_ms);
      samples["total"].push_back(t.timing.total_ms);
      if (!t.plan_ok) ++report.plan_violations;
      ++report.steps;
    }
  }
  for (const auto& [stage, v] : samples) {
    StageStats s;
    s.p50_ms = Percentile(v, 50.0);
    s.p95_ms = Percentile(v, 95.0);
    s.mean_ms = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    report.stages[stage] = s;
  }
  const double mean_total = report.stages["total"].mean_ms;
  report.steps_per_second = mean_total > 0.0 ? 1000.0 / mean_total
                                             : std::numeric_limits<double>::infinity();
  if (!out_dir.empty()) {
    PrepareDirectory(out_dir);
    WriteText(out_dir / "bench.json", ToJson(report).dump(2) + "\n");
    WriteText(out_dir / "bench.txt", FormatBench(report));
    Json config = settings.ToJson();
    if (model_path) config["model"] = model_path->generic_string();
    WriteText(out_dir / "config.json", config.dump(2) + "\n");
  }
  return report;
}

nlohmann::ordered_json ToJson(const BenchReport& report) {
  Json j;
  j["format"] = "mpip-bench";
  j["steps"] = report.steps;
  j["ensemble_size"] = report.ensemble_size;
  j["basis_per_channel"] = report.basis_per_channel;
  j["channels"] = report.channels;
  Json stages = Json::object();
  for (const auto& [name, s] : report.stages) {
    stages[name] = {{"p50_ms", s.p50_ms}, {"p95_ms", s.p95_ms}, {"mean_ms", s.mean_ms}};
  }
  j["stages"] = stages;
  j["steps_per_second"] = NullableDouble(report.steps_per_second);
  j["plan_violations"] = report.plan_violations;
  return j;
}

std::string FormatBench(const BenchReport& report) {
  std::string out;
  char line[160];
  std::snprintf(line, sizeof line, "steps %d  E=%d  B=%d  D=%d\n", report.steps,
                report.ensemble_size, report.basis_per_channel, report.channels);
  out += line;
  std::snprintf(line, sizeof line, "%-10s %12s %12s %12s\n", "stage", "p50_ms",
                "p95_ms", "mean_ms");
  out += line;
  for (const char* stage : {"predict", "update", "optimize", "output", "total"}) {
    const auto it = report.stages.find(stage);
    if (it == report.stages.end()) continue;
    std::snprintf(line, sizeof line, "%-10s %12.4f %12.4f %12.4f\n", stage,
                  it->second.p50_ms, it->second.p95_ms, it->second.mean_ms);
    out += line;
  }
  std::snprintf(line, sizeof line, "steps/sec %.1f\n", report.steps_per_second);
  out += line;
  return out;
}

}  // namespace mpip::cli
