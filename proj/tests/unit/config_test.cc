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

#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "mpip/errors.h"

namespace mpip {
namespace {

TEST(WorldConfigJsonTest, RoundTrip) {
  WorldConfig c;
  c.preset = WorldPreset::kJumping;
  c.num_observed = 8;
  c.coupling_gain = 1.25;
  c.excitation_bumps = 7;
  c.seed = 123456789012345ULL;
  const WorldConfig back = WorldConfigFromJson(nlohmann::json::parse(ToJson(c).dump()));
  EXPECT_EQ(ToJson(back), ToJson(c));
  EXPECT_EQ(back.seed, c.seed);
}

TEST(WorldConfigJsonTest, PartialOverridesBase) {
  WorldConfig base;
  base.noise_std = 0.5;
  const WorldConfig c = WorldConfigFromJson({{"coupling_gain", 2.0}}, base);
  EXPECT_EQ(c.coupling_gain, 2.0);
  EXPECT_EQ(c.noise_std, 0.5);
}

TEST(WorldConfigJsonTest, Errors) {
  EXPECT_THROW(WorldConfigFromJson({{"colour", 1}}), ConfigError);
  EXPECT_THROW(WorldConfigFromJson({{"coupling_gain", "high"}}), ConfigError);
  EXPECT_THROW(WorldConfigFromJson({{"coupling_gain", -1.0}}), ConfigError);
  EXPECT_THROW(WorldConfigFromJson({{"preset", "swimming"}}), ConfigError);
  EXPECT_THROW(WorldConfigFromJson(nlohmann::json::array()), ConfigError);
}

TEST(TrainConfigJsonTest, RoundTripAndErrors) {
  TrainConfig c;
  c.family = BasisFamily::kVonMises;
  c.ridge = 0.1;
  c.phase_mode = PhaseMode::kWrap;
  c.process_noise.weight_std = 1e-4;
  const TrainConfig back = TrainConfigFromJson(nlohmann::json::parse(ToJson(c).dump()));
  EXPECT_EQ(ToJson(back), ToJson(c));
  EXPECT_THROW(TrainConfigFromJson({{"basis_per_channel", 1}}), ConfigError);
  EXPECT_THROW(TrainConfigFromJson({{"ridge", -1.0}}), ConfigError);
  EXPECT_THROW(TrainConfigFromJson({{"phase_mode", "bounce"}}), ConfigError);
  EXPECT_THROW(TrainConfigFromJson({{"process_noise", {{"x", 1}}}}), ConfigError);
}

TEST(ExperimentConfigJsonTest, RoundTripAndErrors) {
  ExperimentConfig c;
  c.mode = ControlMode::kSymmetry;
  c.horizon_x = 0.4;
  c.rho = 3.0;
  c.mpc.covariance_ridge = 1e-2;
  c.mpc.optimizer.max_iterations = 17;
  const ExperimentConfig back =
      ExperimentConfigFromJson(nlohmann::json::parse(ToJson(c).dump()));
  EXPECT_EQ(ToJson(back), ToJson(c));
  EXPECT_EQ(back.mode, ControlMode::kSymmetry);
  EXPECT_THROW(ExperimentConfigFromJson({{"objective", "maximal"}}), ConfigError);
  EXPECT_THROW(ExperimentConfigFromJson({{"horizon_x", 1.5}}), ConfigError);
  EXPECT_THROW(ExperimentConfigFromJson({{"rho", -0.1}}), ConfigError);
  EXPECT_THROW(ExperimentConfigFromJson({{"psi_grid_points", 1}}), ConfigError);
  EXPECT_THROW(ExperimentConfigFromJson({{"covariance_ridge", 0.0}}), ConfigError);
  EXPECT_THROW(ExperimentConfigFromJson({{"unknown", 0.0}}), ConfigError);
}

TEST(LoadJsonFileTest, MissingAndMalformed) {
  const auto path = std::filesystem::temp_directory_path() / "mpip_config_test.json";
  std::filesystem::remove(path);
  EXPECT_THROW(LoadJsonFile(path), ConfigError);
  {
    std::ofstream(path) << "{\"a\": [1, 2";
  }
  EXPECT_THROW(LoadJsonFile(path), ConfigError);
  {
    std::ofstream(path) << "{\"a\": [1, 2]}";
  }
  EXPECT_EQ(LoadJsonFile(path)["a"][1], 2);
  std::filesystem::remove(path);
}

TEST(ShippedConfigsTest, Parse) {
  for (const char* name : {"walking.json", "jumping.json"}) {
    const auto j = LoadJsonFile(std::filesystem::path(MPIP_CONFIG_DIR) / name);
    EXPECT_NO_THROW(WorldConfigFromJson(j.at("world")));
    EXPECT_NO_THROW(TrainConfigFromJson(j.at("train")));
    nlohmann::json run = j.at("run");
    run.erase("trials");
    EXPECT_NO_THROW(ExperimentConfigFromJson(run));
  }
}

}  // namespace
}  // namespace mpip
