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

#include "mpip/synth.h"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <string>

#include "mpip/config.h"
#include "mpip/errors.h"

namespace mpip {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double Bump(double phase, double center, double width) {
  const double z = (phase - center) / width;
  return std::exp(-z * z);
}

const char* const kWalkingNames[] = {"knee_angle", "ankle_intact",
                                     "ankle_prosthesis", "hip_angle",
                                     "thigh_gyro", "shank_gyro"};

}  // namespace

std::string_view ToString(WorldPreset preset) {
  return preset == WorldPreset::kWalking ? "walking" : "jumping";
}

WorldPreset ParseWorldPreset(std::string_view name) {
  if (name == "walking") return WorldPreset::kWalking;
  if (name == "jumping") return WorldPreset::kJumping;
  throw ConfigError("unknown world preset '" + std::string(name) + "'");
}

void ValidateWorldConfig(const WorldConfig& c) {
  if (!(c.stride_period > 0.0)) throw ConfigError("stride_period must be > 0");
  if (!(c.sample_rate > 0.0)) throw ConfigError("sample_rate must be > 0");
  if (!(c.period_jitter >= 0.0 && c.period_jitter < 0.5)) {
    throw ConfigError("period_jitter must lie in [0, 0.5)");
  }
  if (c.num_observed < 3) throw ConfigError("num_observed must be >= 3");
  if (c.harmonics < 1) throw ConfigError("harmonics must be >= 1");
  if (c.excitation_bumps < 0 || c.excitation_bumps == 1) {
    throw ConfigError("excitation_bumps must be 0 or >= 2");
  }
  if (!(c.coupling_gain > 0.0)) throw ConfigError("coupling_gain must be > 0");
  if (!(c.noise_std >= 0.0)) throw ConfigError("noise_std must be >= 0");
  if (!(c.amplitude_jitter >= 0.0) || !(c.excitation_amplitude >= 0.0)) {
    throw ConfigError("jitter and excitation amplitudes must be >= 0");
  }
  if (c.stride_period * c.sample_rate < 4.0) {
    throw ConfigError("stride too short for the sample rate");
  }
}

std::uint64_t DeriveSeed(std::uint64_t seed, std::uint64_t index) {
  // splitmix64 finalizer
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

World::World(WorldConfig config) : config_(config) {
  ValidateWorldConfig(config_);
  const int k = config_.num_observed;
  for (int i = 0; i < k; ++i) {
    std::string name = i < 6 ? kWalkingNames[i] : "imu_" + std::to_string(i);
    schema_.push_back({std::move(name), Role::kObserved});
  }
  schema_.push_back({"knee_force", Role::kLatent});
  schema_.push_back({"ankle_command", Role::kControl});

  std::mt19937_64 rng(config_.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  offsets_.resize(k);
  amplitudes_.resize(k, config_.harmonics);
  phases_.resize(k, config_.harmonics);
  loadings_.resize(k, 2);
  for (int i = 0; i < k; ++i) {
    offsets_[i] = -0.3 + 0.6 * unit(rng);
    const double base = 0.3 + 0.5 * unit(rng);
    for (int h = 0; h < config_.harmonics; ++h) {
      amplitudes_(i, h) = base / (h + 1);
      phases_(i, h) = kTwoPi * unit(rng);
    }
    loadings_(i, 0) = normal(rng) / std::numbers::sqrt2;
    loadings_(i, 1) = normal(rng) / std::numbers::sqrt2;
  }
  force_loading_ << 0.8, 0.6;
}

double World::event_phase() const {
  return config_.preset == WorldPreset::kJumping ? 0.62 : 0.15;
}

StrideParams World::SampleStride(std::mt19937_64& rng) const {
  std::normal_distribution<double> normal(0.0, 1.0);
  StrideParams stride;
  if (config_.preset == WorldPreset::kJumping) {
    stride.style = std::bernoulli_distribution(0.5)(rng) ? 1 : 0;
    stride.factor1 = (stride.style ? 1.0 : -1.0) + 0.5 * normal(rng);
  } else {
    stride.factor1 = normal(rng);
  }
  stride.factor2 = normal(rng);
  stride.period =
      config_.stride_period * (1.0 + config_.period_jitter * normal(rng));
  stride.excitation.resize(static_cast<std::size_t>(config_.excitation_bumps));
  for (double& e : stride.excitation) e = normal(rng);
  stride.samples =
      static_cast<int>(std::lround(stride.period * config_.sample_rate)) + 1;
  return stride;
}

double World::NominalControl(double phase) const {
  const double shift =
      config_.preset == WorldPreset::kWalking ? -0.5 * std::numbers::pi : 0.0;
  return config_.control_offset +
         config_.control_amplitude * std::sin(kTwoPi * phase + shift);
}

double World::Excitation(double phase, const StrideParams& stride) const {
  if (config_.excitation_amplitude == 0.0 || stride.excitation.empty()) {
    return 0.0;
  }
  // Random weights on unit-peak bumps spread over the stride, scaled so the
  // mid-stride standard deviation equals the configured amplitude.
  const int k = static_cast<int>(stride.excitation.size());
  const double width = 1.0 / k;
  double value = 0.0;
  double norm = 0.0;
  for (int b = 0; b < k; ++b) {
    const double center = static_cast<double>(b) / (k - 1);
    const double z = (phase - center) / (2.0 * width);
    const double zm = (0.5 - center) / (2.0 * width);
    value += stride.excitation[b] * std::exp(-z * z);
    norm += std::exp(-2.0 * zm * zm);
  }
  return config_.excitation_amplitude * value / std::sqrt(norm);
}

double World::DemonstratedControl(double phase,
                                  const StrideParams& stride) const {
  return NominalControl(phase) + Excitation(phase, stride);
}

double World::Kinematic(int channel, double phase, const StrideParams& stride,
                        int derivative) const {
  const double scale =
      1.0 + config_.amplitude_jitter * (loadings_(channel, 0) * stride.factor1 +
                                        loadings_(channel, 1) * stride.factor2);
  double value = derivative == 0 ? offsets_[channel] : 0.0;
  for (int h = 0; h < config_.harmonics; ++h) {
    const double omega = kTwoPi * (h + 1);
    const double arg = omega * phase + phases_(channel, h);
    const double term = derivative == 0 ? std::sin(arg)
                                        : -omega * omega * std::sin(arg);
    value += scale * amplitudes_(channel, h) * term;
  }
  return value;
}

Eigen::VectorXd World::Observe(double phase, double control,
                               const StrideParams& stride) const {
  Eigen::VectorXd out(config_.num_observed);
  for (int i = 0; i < config_.num_observed; ++i) {
    out[i] = Kinematic(i, phase, stride, 0);
  }
  out[prosthesis_ankle_channel()] =
      0.6 * Kinematic(intact_ankle_channel(), phase, stride, 0) +
      config_.ankle_gain * control;
  return out;
}

double World::KneeAcceleration(double phase, const StrideParams& stride) const {
  return Kinematic(knee_channel(), phase, stride, 2) /
         (stride.period * stride.period);
}

double World::BaseForce(double phase, const StrideParams& stride) const {
  const double scale =
      1.0 + config_.amplitude_jitter * (force_loading_[0] * stride.factor1 +
                                        force_loading_[1] * stride.factor2);
  double profile = 0.0;
  if (config_.preset == WorldPreset::kWalking) {
    profile = 0.2 + 1.1 * Bump(phase, 0.15, 0.18) + 0.9 * Bump(phase, 0.47, 0.20);
  } else {
    const double landing = stride.style ? 3.2 : 1.9;
    profile = 0.3 + 1.0 * Bump(phase, 0.25, 0.16) +
              landing * Bump(phase, event_phase(), 0.14);
  }
  return scale * profile + config_.coupling_gain * config_.control_offset;
}

double World::Force(double phase, double control,
                    const StrideParams& stride) const {
  return BaseForce(phase, stride) - config_.coupling_gain * control +
         config_.accel_gain * KneeAcceleration(phase, stride);
}

Demonstration World::Generate(const StrideParams& stride,
                              std::mt19937_64& noise_rng) const {
  const int length = stride.samples;
  const int k = config_.num_observed;
  const Eigen::VectorXd phases = LinearPhases(length);
  Eigen::MatrixXd samples(length, k + 2);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int t = 0; t < length; ++t) {
    const double phase = phases[t];
    const double u = DemonstratedControl(phase, stride);
    Eigen::VectorXd y = Observe(phase, u, stride);
    if (config_.noise_std > 0.0) {
      for (int i = 0; i < k; ++i) y[i] += config_.noise_std * normal(noise_rng);
    }
    samples.row(t).head(k) = y.transpose();
    samples(t, force_channel()) = Force(phase, u, stride);
    samples(t, control_channel()) = u;
  }
  return MakeDemonstration(schema_, std::move(samples), config_.sample_rate);
}

Demonstration GenerateDemonstration(const WorldConfig& config,
                                    std::uint64_t demo_seed) {
  const World world(config);
  std::mt19937_64 rng(demo_seed);
  const StrideParams stride = world.SampleStride(rng);
  return world.Generate(stride, rng);
}

Eigen::VectorXd GroundTruthForce(const World& world,
                                 const Eigen::Ref<const Eigen::VectorXd>& control,
                                 const Eigen::Ref<const Eigen::VectorXd>& phases,
                                 const StrideParams& stride) {
  if (control.size() != phases.size()) {
    throw DomainError("control and phase grids differ in length");
  }
  Eigen::VectorXd force(control.size());
  for (Eigen::Index t = 0; t < control.size(); ++t) {
    force[t] = world.Force(phases[t], control[t], stride);
  }
  return force;
}

GeneratedSession GenerateSession(const WorldConfig& config, int num_strides,
                                 std::uint64_t seed) {
  if (num_strides < 1) throw ConfigError("session needs at least one stride");
  const World world(config);
  GeneratedSession session;
  for (int i = 0; i < num_strides; ++i) {
    const std::uint64_t demo_seed = DeriveSeed(seed, i);
    std::mt19937_64 rng(demo_seed);
    StrideParams stride = world.SampleStride(rng);
    session.demos.push_back(world.Generate(stride, rng));
    session.strides.push_back(std::move(stride));
    session.seeds.push_back(demo_seed);
  }
  return session;
}

std::filesystem::path WriteSession(const GeneratedSession& session,
                                   const WorldConfig& config,
                                   const std::filesystem::path& directory) {
  std::error_code ec;
  std::filesystem::create_directories(directory, ec);
  if (ec) {
    throw Error("cannot create " + directory.string() + ": " + ec.message());
  }
  SessionManifest manifest;
  manifest.sample_rate = config.sample_rate;
  for (size_t i = 0; i < session.demos.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "stride_%03zu.csv", i);
    WriteDemonstration(directory / name, session.demos[i]);
    manifest.demonstrations.push_back(name);
  }
  nlohmann::ordered_json metadata;
  metadata["generator"] = "mpip-synth";
  metadata["world"] = ToJson(config);
  metadata["stride_seeds"] = session.seeds;
  manifest.metadata_json = metadata.dump();
  const auto path = directory / "manifest.json";
  WriteManifest(path, manifest);
  return path;
}

}  // namespace mpip
