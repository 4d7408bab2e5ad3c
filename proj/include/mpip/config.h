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

#ifndef MPIP_CONFIG_H_
#define MPIP_CONFIG_H_

#include <nlohmann/json.hpp>

#include "mpip/harness.h"
#include "mpip/model.h"
#include "mpip/synth.h"

namespace mpip {

// JSON views of the configuration structs. Readers start from `base`, apply
// the keys present and reject unknown keys with ConfigError.
nlohmann::ordered_json ToJson(const WorldConfig& config);
WorldConfig WorldConfigFromJson(const nlohmann::json& j, WorldConfig base = {});

nlohmann::ordered_json ToJson(const TrainConfig& config);
TrainConfig TrainConfigFromJson(const nlohmann::json& j, TrainConfig base = {});

nlohmann::ordered_json ToJson(const ExperimentConfig& config);
ExperimentConfig ExperimentConfigFromJson(const nlohmann::json& j,
                                          ExperimentConfig base = {});

// Reads a JSON document; parse failures and missing files are config errors.
nlohmann::json LoadJsonFile(const std::filesystem::path& path);

}  // namespace mpip

#endif  // MPIP_CONFIG_H_
