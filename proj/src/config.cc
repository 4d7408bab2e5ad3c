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

#include "mpip/config.h"

#include <fstream>
#include <set>
#include <string>

#include "mpip/errors.h"

namespace mpip {
namespace {

void CheckKeys(const nlohmann::json& j, const std::set<std::string>& allowed,
               const char* section) {
  if (!j.is_object()) {
    throw ConfigError(std::string(section) + " config must be an object");
  }
  for (const auto& item : j.items()) {
    if (!allowed.count(item.key())) {
      throw ConfigError("unknown key '" + item.key() + "' in " + section +
                        " config");
    }
  }
}

template <typename T>
void Read(const nlohmann::json& j, const char* key, T& field) {
  if (!j.contains(key)) return;
  try {
    field = j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config key '") + key + "': " + e.what());
  }
}

}  // namespace

nlohmann::ordered_json ToJson(const WorldConfig& c) {
  nlohmann::ordered_json j;
  j["preset"] = ToString(c.preset);
  j["stride_period"] = c.stride_period;
  j["period_jitter"] = c.period_jitter;
  j["sample_rate"] = c.sample_rate;
  j["num_observed"] = c.num_observed;
  j["harmonics"] = c.harmonics;
  j["amplitude_jitter"] = c.amplitude_jitter;
  j["control_offset"] = c.control_offset;
  j["control_amplitude"] = c.control_amplitude;
  j["excitation_amplitude"] = c.excitation_amplitude;
  j["excitation_bumps"] = c.excitation_bumps;
  j["coupling_gain"] = c.coupling_gain;
  j["accel_gain"] = c.accel_gain;
  j["ankle_gain"] = c.ankle_gain;
  j["noise_std"] = c.noise_std;
  j["seed"] = c.seed;
  return j;
}

WorldConfig WorldConfigFromJson(const nlohmann::json& j, WorldConfig c) {
  CheckKeys(j,
            {"preset", "stride_period", "period_jitter", "sample_rate",
             "num_observed", "harmonics", "amplitude_jitter", "control_offset",
             "control_amplitude", "excitation_amplitude",
             "excitation_bumps", "coupling_gain", "accel_gain",
             "ankle_gain", "noise_std", "seed"},
            "world");
  if (j.contains("preset")) {
    c.preset = ParseWorldPreset(j.at("preset").get<std::string>());
  }
  Read(j, "stride_period", c.stride_period);
  Read(j, "period_jitter", c.period_jitter);
  Read(j, "sample_rate", c.sample_rate);
  Read(j, "num_observed", c.num_observed);
  Read(j, "harmonics", c.harmonics);
  Read(j, "amplitude_jitter", c.amplitude_jitter);
  Read(j, "control_offset", c.control_offset);
  Read(j, "control_amplitude", c.control_amplitude);
  Read(j, "excitation_amplitude", c.excitation_amplitude);
  Read(j, "excitation_bumps", c.excitation_bumps);
  Read(j, "coupling_gain", c.coupling_gain);
  Read(j, "accel_gain", c.accel_gain);
  Read(j, "ankle_gain", c.ankle_gain);
  Read(j, "noise_std", c.noise_std);
  Read(j, "seed", c.seed);
  ValidateWorldConfig(c);
  return c;
}

nlohmann::ordered_json ToJson(const TrainConfig& c) {
  nlohmann::ordered_json j;
  j["basis_family"] = ToString(c.family);
  j["basis_per_channel"] = c.basis_per_channel;
  j["basis_width"] = c.width;
  j["ridge"] = c.ridge;
  j["ensemble_size"] = c.ensemble_size;
  j["seed"] = c.seed;
  j["noise_floor"] = c.noise_floor;
  j["control_channels"] = c.control_channels;
  j["phase_mode"] = ToString(c.phase_mode);
  j["process_noise"] = {{"phase_std", c.process_noise.phase_std},
                        {"velocity_std", c.process_noise.velocity_std},
                        {"weight_std", c.process_noise.weight_std}};
  return j;
}

TrainConfig TrainConfigFromJson(const nlohmann::json& j, TrainConfig c) {
  CheckKeys(j,
            {"basis_family", "basis_per_channel", "basis_width", "ridge",
             "ensemble_size", "seed", "noise_floor", "control_channels",
             "phase_mode", "process_noise"},
            "train");
  if (j.contains("basis_family")) {
    c.family = ParseBasisFamily(j.at("basis_family").get<std::string>());
  }
  if (j.contains("phase_mode")) {
    c.phase_mode = ParsePhaseMode(j.at("phase_mode").get<std::string>());
  }
  Read(j, "basis_per_channel", c.basis_per_channel);
  Read(j, "basis_width", c.width);
  Read(j, "ridge", c.ridge);
  Read(j, "ensemble_size", c.ensemble_size);
  Read(j, "seed", c.seed);
  Read(j, "noise_floor", c.noise_floor);
  Read(j, "control_channels", c.control_channels);
  if (j.contains("process_noise")) {
    const auto& p = j.at("process_noise");
    CheckKeys(p, {"phase_std", "velocity_std", "weight_std"}, "process_noise");
    Read(p, "phase_std", c.process_noise.phase_std);
    Read(p, "velocity_std", c.process_noise.velocity_std);
    Read(p, "weight_std", c.process_noise.weight_std);
  }
  if (c.basis_per_channel < 2) throw ConfigError("basis_per_channel must be >= 2");
  if (!(c.ridge >= 0.0)) throw ConfigError("ridge must be >= 0");
  return c;
}

nlohmann::ordered_json ToJson(const ExperimentConfig& c) {
  nlohmann::ordered_json j;
  j["objective"] = ToString(c.mode);
  j["target_channel"] = c.target_channel;
  j["symmetry_channel"] = c.symmetry_channel;
  j["reference_channel"] = c.reference_channel;
  j["horizon_x"] = c.horizon_x;
  j["horizon_u"] = c.horizon_u;
  j["rho"] = c.rho;
  j["perturb"] = c.perturb;
  j["event_phase"] = c.event_phase;
  j["max_iterations"] = c.mpc.optimizer.max_iterations;
  j["gradient_tolerance"] = c.mpc.optimizer.gradient_tolerance;
  j["time_budget_ms"] = c.mpc.optimizer.time_budget_ms;
  j["warm_start"] = c.mpc.warm_start;
  j["psi_grid_points"] = c.mpc.psi_grid_points;
  j["covariance_ridge"] = c.mpc.covariance_ridge;
  return j;
}

ExperimentConfig ExperimentConfigFromJson(const nlohmann::json& j,
                                          ExperimentConfig c) {
  CheckKeys(j,
            {"objective", "target_channel", "symmetry_channel",
             "reference_channel", "horizon_x", "horizon_u", "rho", "perturb",
             "event_phase", "max_iterations", "gradient_tolerance",
             "time_budget_ms", "warm_start", "psi_grid_points",
             "covariance_ridge"},
            "run");
  if (j.contains("objective")) {
    c.mode = ParseControlMode(j.at("objective").get<std::string>());
  }
  Read(j, "target_channel", c.target_channel);
  Read(j, "symmetry_channel", c.symmetry_channel);
  Read(j, "reference_channel", c.reference_channel);
  Read(j, "horizon_x", c.horizon_x);
  Read(j, "horizon_u", c.horizon_u);
  Read(j, "rho", c.rho);
  Read(j, "perturb", c.perturb);
  Read(j, "event_phase", c.event_phase);
  Read(j, "max_iterations", c.mpc.optimizer.max_iterations);
  Read(j, "gradient_tolerance", c.mpc.optimizer.gradient_tolerance);
  Read(j, "time_budget_ms", c.mpc.optimizer.time_budget_ms);
  Read(j, "warm_start", c.mpc.warm_start);
  Read(j, "psi_grid_points", c.mpc.psi_grid_points);
  Read(j, "covariance_ridge", c.mpc.covariance_ridge);
  if (!(c.horizon_x >= 0.0 && c.horizon_x <= 1.0) ||
      !(c.horizon_u >= 0.0 && c.horizon_u <= 1.0)) {
    throw ConfigError("horizons must lie in [0, 1]");
  }
  if (!(c.rho >= 0.0)) throw ConfigError("rho must be >= 0");
  if (c.mpc.optimizer.max_iterations < 0) {
    throw ConfigError("max_iterations must be >= 0");
  }
  if (c.mpc.psi_grid_points < 2) throw ConfigError("psi_grid_points must be >= 2");
  if (!(c.mpc.covariance_ridge > 0.0)) {
    throw ConfigError("covariance_ridge must be > 0");
  }
  return c;
}

nlohmann::json LoadJsonFile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("invalid JSON in '" + path.string() + "': " + e.what());
  }
}

}  // namespace mpip
