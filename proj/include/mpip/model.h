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

#ifndef MPIP_MODEL_H_
#define MPIP_MODEL_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>

#include <Eigen/Dense>

#include "mpip/basis.h"
#include "mpip/dataset.h"

namespace mpip {

// Layout of a latent state vector s = [phase, phase velocity, w].
inline constexpr int kPhaseIndex = 0;
inline constexpr int kVelocityIndex = 1;
inline constexpr int kWeightOffset = 2;

// clamp: phase saturates at [0, 1] (discrete actions such as a jump).
// wrap: phase is taken mod 1 (cyclic gait).
enum class PhaseMode { kClamp, kWrap };

std::string_view ToString(PhaseMode mode);
PhaseMode ParsePhaseMode(std::string_view name);

// Standard deviations of the additive transition noise, per predict call.
struct ProcessNoise {
  double phase_std = 1e-4;
  double velocity_std = 1e-5;
  double weight_std = 0.0;
};

struct TrainConfig {
  BasisFamily family = BasisFamily::kGaussian;
  int basis_per_channel = 15;
  double width = 0.0;  // <= 0 selects 1 / basis_per_channel
  double ridge = 1e-6;
  int ensemble_size = 0;  // 0 keeps one member per demonstration
  std::uint64_t seed = 0;
  // observation noise floor, relative to the squared channel range
  double noise_floor = 1e-6;
  int control_channels = 1;
  PhaseMode phase_mode = PhaseMode::kClamp;
  ProcessNoise process_noise;
};

// Trained interaction primitive: basis, prior ensemble of latent states taken
// directly from the demonstrations, per-weight box bounds and noise levels.
struct IPModel {
  Schema channels;
  BasisModel basis;
  double sample_rate = 100.0;
  double ridge = 1e-6;
  PhaseMode phase_mode = PhaseMode::kClamp;
  ProcessNoise process_noise;
  double mean_phase_velocity = 0.0;   // phase per sample
  Eigen::MatrixXd ensemble0;          // (2 + B) x E, one member per column
  Eigen::VectorXd weight_min;         // length B
  Eigen::VectorXd weight_max;         // length B
  Eigen::VectorXd noise_variance;     // length D, zero for unobserved roles

  int state_size() const { return kWeightOffset + basis.layout().size(); }
  int ensemble_size() const { return static_cast<int>(ensemble0.cols()); }
  int num_channels() const { return static_cast<int>(channels.size()); }
  int ChannelIndex(std::string_view name) const {
    return FindChannel(channels, name);
  }
  // Row offset of a channel's weight block inside a state vector.
  int StateOffset(int channel) const {
    return kWeightOffset + basis.layout().offset(channel);
  }
  // First control channel.
  int ControlChannel() const;
};

// Concatenated weight vector of one demonstration.
Eigen::VectorXd EncodeDemonstration(const Demonstration& demo,
                                    const BasisModel& basis, double ridge);

// Deterministic given (demonstrations, config). Needs N >= 2 demonstrations
// sharing one schema.
IPModel Train(std::span<const Demonstration> demos, const TrainConfig& config);

struct GaussianMoments {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;
};

// Sample mean and unbiased (E - 1) covariance of the columns of `members`.
GaussianMoments SampleMoments(const Eigen::Ref<const Eigen::MatrixXd>& members);

GaussianMoments PriorStatistics(const IPModel& model);

// Single JSON document; doubles are written in shortest round-trip form so a
// reload is bitwise exact.
std::string SerializeModel(const IPModel& model);
IPModel DeserializeModel(std::string_view text);
void SaveModel(const std::filesystem::path& path, const IPModel& model);
IPModel LoadModel(const std::filesystem::path& path);

}  // namespace mpip

#endif  // MPIP_MODEL_H_
