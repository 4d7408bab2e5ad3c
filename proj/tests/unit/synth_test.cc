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

#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "mpip/basis.h"
#include "mpip/errors.h"

namespace mpip {
namespace {

std::string ReadAll(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

std::size_t DirectoryHash(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  std::string joined;
  for (const auto& f : files) joined += f.filename().string() + "\n" + ReadAll(f);
  return std::hash<std::string>{}(joined);
}

// Noise-free knee angle as a function of phase, for finite differences.
double Knee(const World& world, double phase, const StrideParams& stride) {
  return world.Observe(phase, 0.0, stride)[world.knee_channel()];
}

TEST(WorldTest, NoRandomnessMeansIdenticalDemos) {
  WorldConfig config;
  config.noise_std = 0.0;
  config.excitation_amplitude = 0.0;
  // per-stride jitter is also a source of randomness
  config.period_jitter = 0.0;
  config.amplitude_jitter = 0.0;
  const Demonstration a = GenerateDemonstration(config, 1);
  const Demonstration b = GenerateDemonstration(config, 2);
  EXPECT_EQ(a.samples, b.samples);
}

TEST(WorldTest, SameSeedIsBitwiseReproducible) {
  const Demonstration a = GenerateDemonstration(WorldConfig{}, 17);
  const Demonstration b = GenerateDemonstration(WorldConfig{}, 17);
  EXPECT_EQ(a.samples, b.samples);
  EXPECT_NE(a.samples, GenerateDemonstration(WorldConfig{}, 18).samples);
}

TEST(WorldTest, LatentForceFollowsCouplingLaw) {
  for (auto preset : {WorldPreset::kWalking, WorldPreset::kJumping}) {
    WorldConfig config;
    config.preset = preset;
    config.excitation_amplitude = 0.0;
    config.accel_gain = 0.01;
    const World world(config);
    std::mt19937_64 rng(4);
    const StrideParams stride = world.SampleStride(rng);
    const Demonstration demo = world.Generate(stride, rng);
    const double c = config.coupling_gain;
    for (int t = 0; t < demo.length(); ++t) {
      const double phase = demo.phases[t];
      const double u0 = world.NominalControl(phase);
      EXPECT_EQ(demo.samples(t, world.control_channel()), u0);
      // knee acceleration by central differences, converted to seconds
      const double h = 1e-4;
      const double qdd = (Knee(world, phase + h, stride) - 2.0 * Knee(world, phase, stride) +
                          Knee(world, phase - h, stride)) /
                         (h * h) / (stride.period * stride.period);
      const double expected =
          world.BaseForce(phase, stride) - c * u0 + config.accel_gain * qdd;
      EXPECT_NEAR(demo.samples(t, world.force_channel()), expected, 1e-6);
      EXPECT_EQ(demo.samples(t, world.force_channel()),
                world.BaseForce(phase, stride) - c * u0 +
                    config.accel_gain * world.KneeAcceleration(phase, stride));
    }
  }
}

TEST(WorldTest, ForceRecoverableFromKinematicsAndControl) {
  const World world(WorldConfig{});
  std::mt19937_64 rng(5);
  const StrideParams stride = world.SampleStride(rng);
  const Demonstration demo = world.Generate(stride, rng);
  for (int t = 0; t < demo.length(); ++t) {
    const double u = demo.samples(t, world.control_channel());
    EXPECT_EQ(demo.samples(t, world.force_channel()), world.Force(demo.phases[t], u, stride));
    // prosthesis ankle responds to the control signal
    const double ankle = world.Observe(demo.phases[t], u, stride)[world.prosthesis_ankle_channel()];
    EXPECT_NEAR(demo.samples(t, world.prosthesis_ankle_channel()), ankle, 0.1);
  }
}

TEST(WorldTest, ControlAndForceWeightsAreAnticorrelated) {
  const auto session = GenerateSession(WorldConfig{}, 20, 12);
  const World world(WorldConfig{});
  const BasisModel basis = BasisModel::Uniform(BasisFamily::kGaussian, 1, 15);
  Eigen::MatrixXd wu(20, 15), wf(20, 15);
  for (int n = 0; n < 20; ++n) {
    const auto& d = session.demos[n];
    wu.row(n) = FitWeights(d.samples.col(world.control_channel()), d.phases, basis, 0, 1e-6);
    wf.row(n) = FitWeights(d.samples.col(world.force_channel()), d.phases, basis, 0, 1e-6);
  }
  const Eigen::MatrixXd cu = wu.rowwise() - wu.colwise().mean();
  const Eigen::MatrixXd cf = wf.rowwise() - wf.colwise().mean();
  const double correlation =
      (cu.array() * cf.array()).sum() / std::sqrt(cu.squaredNorm() * cf.squaredNorm());
  EXPECT_LT(correlation, 0.0);
}

TEST(GroundTruthForceTest, ZeroControl) {
  const World world(WorldConfig{});
  std::mt19937_64 rng(6);
  const StrideParams stride = world.SampleStride(rng);
  const Eigen::VectorXd phases = LinearPhases(stride.samples);
  const Eigen::VectorXd f =
      GroundTruthForce(world, Eigen::VectorXd::Zero(phases.size()), phases, stride);
  for (Eigen::Index t = 0; t < phases.size(); ++t) {
    EXPECT_DOUBLE_EQ(f[t], world.BaseForce(phases[t], stride) +
                               world.config().accel_gain *
                                   world.KneeAcceleration(phases[t], stride));
  }
  EXPECT_THROW(GroundTruthForce(world, Eigen::VectorXd::Zero(3), phases, stride), DomainError);
}

TEST(GroundTruthForceTest, MonotoneAndAffineInControl) {
  const World world(WorldConfig{});
  std::mt19937_64 rng(7);
  const StrideParams stride = world.SampleStride(rng);
  const Eigen::VectorXd phases = LinearPhases(stride.samples);
  std::normal_distribution<double> normal;
  Eigen::VectorXd u1(phases.size()), u2(phases.size());
  for (Eigen::Index t = 0; t < phases.size(); ++t) {
    u2[t] = normal(rng);
    u1[t] = u2[t] + std::abs(normal(rng));
  }
  const Eigen::VectorXd f1 = GroundTruthForce(world, u1, phases, stride);
  const Eigen::VectorXd f2 = GroundTruthForce(world, u2, phases, stride);
  EXPECT_TRUE((f1.array() <= f2.array()).all());
  for (double a : {-0.5, 0.3, 1.7}) {
    const Eigen::VectorXd mix = GroundTruthForce(world, a * u1 + (1 - a) * u2, phases, stride);
    EXPECT_LT((mix - (a * f1 + (1 - a) * f2)).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(ExcitationTest, ZeroMeanOverManyStrides) {
  const World world(WorldConfig{});
  std::mt19937_64 rng(8);
  const int n = 4000;
  for (double phase : {0.0, 0.2, 0.5, 0.77, 1.0}) {
    double sum = 0.0, sum_sq = 0.0;
    std::mt19937_64 local(rng());
    for (int i = 0; i < n; ++i) {
      const double e = world.Excitation(phase, world.SampleStride(local));
      sum += e;
      sum_sq += e * e;
    }
    const double mean = sum / n;
    const double sd = std::sqrt(sum_sq / n - mean * mean);
    EXPECT_LE(std::abs(mean), 3.0 * sd / std::sqrt(n)) << phase;
    if (phase == 0.5) EXPECT_NEAR(sd, world.config().excitation_amplitude, 0.01);
  }
}

TEST(SessionTest, SingleStrideMatchesDemonstration) {
  const auto session = GenerateSession(WorldConfig{}, 1, 33);
  ASSERT_EQ(session.demos.size(), 1u);
  EXPECT_EQ(session.demos[0].samples,
            GenerateDemonstration(WorldConfig{}, session.seeds[0]).samples);
  EXPECT_EQ(session.seeds[0], DeriveSeed(33, 0));
  EXPECT_THROW(GenerateSession(WorldConfig{}, 0, 1), ConfigError);
}

TEST(SessionTest, FixedSeedWritesIdenticalFiles) {
  const auto tmp = std::filesystem::temp_directory_path();
  const auto a = tmp / "mpip_synth_a", b = tmp / "mpip_synth_b";
  std::filesystem::remove_all(a);
  std::filesystem::remove_all(b);
  WriteSession(GenerateSession(WorldConfig{}, 60, 9), WorldConfig{}, a);
  WriteSession(GenerateSession(WorldConfig{}, 60, 9), WorldConfig{}, b);
  const auto manifest = ReadManifest(a / "manifest.json");
  EXPECT_EQ(manifest.demonstrations.size(), 60u);
  EXPECT_EQ(DirectoryHash(a), DirectoryHash(b));
  EXPECT_EQ(ReadAll(a / "stride_059.csv"), ReadAll(b / "stride_059.csv"));
  std::filesystem::remove_all(a);
  std::filesystem::remove_all(b);
}

TEST(SessionTest, StridesVaryInLengthAndShape) {
  const auto session = GenerateSession(WorldConfig{}, 30, 10);
  std::set<int> lengths;
  for (const auto& d : session.demos) lengths.insert(d.length());
  EXPECT_GT(lengths.size(), 3u);
}

TEST(WorldConfigTest, Validation) {
  WorldConfig c;
  c.coupling_gain = 0.0;
  EXPECT_THROW(World{c}, ConfigError);
  c = WorldConfig{};
  c.stride_period = -1.0;
  EXPECT_THROW(World{c}, ConfigError);
  c = WorldConfig{};
  c.noise_std = -0.1;
  EXPECT_THROW(World{c}, ConfigError);
  c = WorldConfig{};
  c.num_observed = 2;
  EXPECT_THROW(World{c}, ConfigError);
  c = WorldConfig{};
  c.excitation_bumps = 1;
  EXPECT_THROW(World{c}, ConfigError);
  EXPECT_THROW(ParseWorldPreset("running"), ConfigError);
}

TEST(JumpingTest, LandingStylesAndEvent) {
  WorldConfig config;
  config.preset = WorldPreset::kJumping;
  config.excitation_amplitude = 0.0;
  const World world(config);
  EXPECT_DOUBLE_EQ(world.event_phase(), 0.62);
  StrideParams soft, hard;
  soft.style = 0;
  hard.style = 1;
  EXPECT_GT(world.BaseForce(0.62, hard), world.BaseForce(0.62, soft));
  // the landing bump dominates the profile
  double best = 0.0, argmax = 0.0;
  for (int i = 0; i <= 1000; ++i) {
    const double v = world.BaseForce(i / 1000.0, hard);
    if (v > best) best = v, argmax = i / 1000.0;
  }
  EXPECT_NEAR(argmax, 0.62, 0.02);
  EXPECT_EQ(world.schema().size(), 8u);
  EXPECT_EQ(world.schema()[world.force_channel()].role, Role::kLatent);
  EXPECT_EQ(world.schema()[world.control_channel()].role, Role::kControl);
}

}  // namespace
}  // namespace mpip
