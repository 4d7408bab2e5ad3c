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

#ifndef MPIP_SYNTH_H_
#define MPIP_SYNTH_H_

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "mpip/dataset.h"

namespace mpip {

enum class WorldPreset { kWalking, kJumping };

std::string_view ToString(WorldPreset preset);
WorldPreset ParseWorldPreset(std::string_view name);

// Analytic gait world. Kinematics are harmonic sums of the stride phase whose
// amplitudes depend on two per-stride factors; the prosthesis ankle also
// follows the applied control. The latent knee force obeys
//   F(phase) = F0(phase) - c * u(phase) + gamma * qdd(phase)
// with qdd the knee angular acceleration.
struct WorldConfig {
  WorldPreset preset = WorldPreset::kWalking;
  double stride_period = 1.2;     // s
  double period_jitter = 0.04;    // relative std of the stride period
  double sample_rate = 100.0;     // Hz
  int num_observed = 6;           // >= 3
  int harmonics = 3;
  double amplitude_jitter = 0.15;  // relative amplitude spread per factor
  double control_offset = 0.5;     // nominal quasi-active profile
  double control_amplitude = 0.2;
  double excitation_amplitude = 0.2;  // low-frequency random control signal
  int excitation_bumps = 15;          // smooth random bumps per stride, 0 = none
  double coupling_gain = 0.8;  // c > 0
  double accel_gain = 0.0005;  // gamma
  double ankle_gain = 0.3;     // prosthesis ankle angle per unit control
  double noise_std = 0.01;     // observed-channel measurement noise
  std::uint64_t seed = 7;      // world structure
};

void ValidateWorldConfig(const WorldConfig& config);

// Random quantities of one stride (or jump).
struct StrideParams {
  double factor1 = 0.0;
  double factor2 = 0.0;
  double period = 1.2;
  int style = 0;  // jumping: 0 soft landing, 1 hard landing
  std::vector<double> excitation;  // one weight per excitation bump
  int samples = 2;
};

class World {
 public:
  explicit World(WorldConfig config);

  const WorldConfig& config() const { return config_; }
  const Schema& schema() const { return schema_; }
  int knee_channel() const { return 0; }
  int intact_ankle_channel() const { return 1; }
  int prosthesis_ankle_channel() const { return 2; }
  int force_channel() const { return config_.num_observed; }
  int control_channel() const { return config_.num_observed + 1; }
  // Landing phase of the jumping preset (impact event).
  double event_phase() const;

  StrideParams SampleStride(std::mt19937_64& rng) const;

  double NominalControl(double phase) const;
  double Excitation(double phase, const StrideParams& stride) const;
  // Demonstrated control: nominal profile plus excitation.
  double DemonstratedControl(double phase, const StrideParams& stride) const;

  // Noiseless observed channels under control value u.
  Eigen::VectorXd Observe(double phase, double control,
                          const StrideParams& stride) const;
  double KneeAcceleration(double phase, const StrideParams& stride) const;
  double BaseForce(double phase, const StrideParams& stride) const;  // F0
  double Force(double phase, double control, const StrideParams& stride) const;

  // One stride: noisy observed channels, demonstrated control, noiseless
  // latent force.
  Demonstration Generate(const StrideParams& stride,
                         std::mt19937_64& noise_rng) const;

 private:
  double Kinematic(int channel, double phase, const StrideParams& stride,
                   int derivative) const;

  WorldConfig config_;
  Schema schema_;
  Eigen::VectorXd offsets_;
  Eigen::MatrixXd amplitudes_;  // num_observed x harmonics
  Eigen::MatrixXd phases_;      // num_observed x harmonics
  Eigen::MatrixXd loadings_;    // num_observed x 2
  Eigen::Vector2d force_loading_;
};

std::uint64_t DeriveSeed(std::uint64_t seed, std::uint64_t index);

Demonstration GenerateDemonstration(const WorldConfig& config,
                                    std::uint64_t demo_seed);

// Applies the coupling law to a control trajectory sampled at `phases`.
Eigen::VectorXd GroundTruthForce(const World& world,
                                 const Eigen::Ref<const Eigen::VectorXd>& control,
                                 const Eigen::Ref<const Eigen::VectorXd>& phases,
                                 const StrideParams& stride);

struct GeneratedSession {
  std::vector<Demonstration> demos;
  std::vector<StrideParams> strides;
  std::vector<std::uint64_t> seeds;
};

// Stride i uses demo seed DeriveSeed(seed, i).
GeneratedSession GenerateSession(const WorldConfig& config, int num_strides,
                                 std::uint64_t seed);

// Writes stride_XXX.csv files plus manifest.json into `directory` and
// returns the manifest path.
std::filesystem::path WriteSession(const GeneratedSession& session,
                                   const WorldConfig& config,
                                   const std::filesystem::path& directory);

}  // namespace mpip

#endif  // MPIP_SYNTH_H_
