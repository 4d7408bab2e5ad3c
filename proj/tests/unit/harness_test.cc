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


#include "mpip/harness.h"

#include <memory>

#include <gtest/gtest.h>

#include "mpip/errors.h"
#include "mpip/synth.h"

namespace mpip {
namespace {

class HarnessTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    WorldConfig world;
    TrainConfig train;
    train.ridge = 0.1;
    world_ = new World(world);
    model_ = new std::shared_ptr<const IPModel>(
        std::make_shared<const IPModel>(Train(GenerateSession(world, 60, 11).demos, train)));
    test_strides_ = new GeneratedSession(GenerateSession(world, 8, 12345));
  }
  static void TearDownTestSuite() {
    delete world_;
    delete model_;
    delete test_strides_;
  }

  static ExperimentConfig Config(ControlMode mode) {
    ExperimentConfig c;
    c.mode = mode;
    c.mpc.covariance_ridge = 1e-2;
    return c;
  }

  static World* world_;
  static std::shared_ptr<const IPModel>* model_;
  static GeneratedSession* test_strides_;
};

World* HarnessTest::world_ = nullptr;
std::shared_ptr<const IPModel>* HarnessTest::model_ = nullptr;
GeneratedSession* HarnessTest::test_strides_ = nullptr;

TEST_F(HarnessTest, CostConfigPerMode) {
  const IPModel& m = **model_;
  const CostConfig reduce = MakeCostConfig(m, Config(ControlMode::kReduce));
  EXPECT_EQ(reduce.objective, Objective::kMinimize);
  EXPECT_EQ(reduce.target_channel, m.ChannelIndex("knee_force"));
  EXPECT_EQ(reduce.control_channel, m.ControlChannel());
  EXPECT_EQ(MakeCostConfig(m, Config(ControlMode::kIncrease)).objective, Objective::kMaximize);
  const CostConfig sym = MakeCostConfig(m, Config(ControlMode::kSymmetry));
  EXPECT_EQ(sym.objective, Objective::kTrackReference);
  EXPECT_EQ(sym.target_channel, m.ChannelIndex("ankle_prosthesis"));
  EXPECT_EQ(sym.reference_channel, m.ChannelIndex("ankle_intact"));
  ExperimentConfig bad = Config(ControlMode::kReduce);
  bad.target_channel = "elbow_force";
  EXPECT_THROW(MakeCostConfig(m, bad), ConfigError);
}

TEST_F(HarnessTest, ParseModes) {
  for (auto mode : {ControlMode::kReduce, ControlMode::kIncrease, ControlMode::kSymmetry,
                    ControlMode::kReactive, ControlMode::kPassive}) {
    EXPECT_EQ(ParseControlMode(ToString(mode)), mode);
  }
  EXPECT_THROW(ParseControlMode("maximize"), ConfigError);
}

TEST_F(HarnessTest, ClosedLoopTrialIsConsistent) {
  const StrideParams& stride = test_strides_->strides[0];
  for (auto mode : {ControlMode::kReduce, ControlMode::kIncrease, ControlMode::kSymmetry,
                    ControlMode::kReactive, ControlMode::kPassive}) {
    const TrialResult r = RunClosedLoopTrial(*world_, *model_, Config(mode), stride, 3, 0);
    ASSERT_EQ(static_cast<int>(r.ticks.size()), stride.samples);
    EXPECT_EQ(r.plan_violations, 0) << ToString(mode);
    const Eigen::VectorXd truth = GroundTruthForce(*world_, r.control, r.phases, stride);
    EXPECT_LT((truth - r.force).cwiseAbs().maxCoeff(), 1e-12);
    for (size_t t = 1; t < r.ticks.size(); ++t) {
      EXPECT_EQ(r.ticks[t].control, r.ticks[t - 1].next_control);
      EXPECT_LE(r.ticks[t].cost_achieved, r.ticks[t].cost_reactive + 1e-12);
    }
    EXPECT_EQ(r.metrics.mode, ToString(mode));
    EXPECT_TRUE(r.metrics.impulse.count("knee_force"));
    EXPECT_TRUE(r.metrics.peak.count("ankle_command"));
    if (mode == ControlMode::kPassive) {
      for (int t = 0; t < stride.samples; ++t) {
        EXPECT_EQ(r.control[t], world_->NominalControl(r.phases[t]));
      }
    }
    if (mode == ControlMode::kReactive) {
      for (const auto& tick : r.ticks) EXPECT_EQ(tick.cost_achieved, tick.cost_reactive);
    }
  }
}

TEST_F(HarnessTest, SameSeedSameTicks) {
  const StrideParams& stride = test_strides_->strides[1];
  const TrialResult a =
      RunClosedLoopTrial(*world_, *model_, Config(ControlMode::kReduce), stride, 77, 1);
  const TrialResult b =
      RunClosedLoopTrial(*world_, *model_, Config(ControlMode::kReduce), stride, 77, 1);
  EXPECT_EQ(a.control, b.control);
  EXPECT_EQ(a.force, b.force);
  EXPECT_EQ(a.observed, b.observed);
  for (size_t t = 0; t < a.ticks.size(); ++t) {
    EXPECT_EQ(a.ticks[t].phase_estimate, b.ticks[t].phase_estimate);
    EXPECT_EQ(a.ticks[t].cost_achieved, b.ticks[t].cost_achieved);
    EXPECT_EQ(a.ticks[t].force_predicted, b.ticks[t].force_predicted);
  }
  const TrialResult c =
      RunClosedLoopTrial(*world_, *model_, Config(ControlMode::kReduce), stride, 78, 1);
  EXPECT_NE(a.observed, c.observed);
}

TEST_F(HarnessTest, ReduceLowersImpulseAcrossStrides) {
  double reduce = 0.0, reactive = 0.0;
  for (size_t i = 0; i < test_strides_->strides.size(); ++i) {
    const auto& stride = test_strides_->strides[i];
    reduce += RunClosedLoopTrial(*world_, *model_, Config(ControlMode::kReduce), stride, 100 + i,
                                 static_cast<int>(i))
                  .metrics.impulse.at("knee_force");
    reactive += RunClosedLoopTrial(*world_, *model_, Config(ControlMode::kReactive), stride,
                                   100 + i, static_cast<int>(i))
                    .metrics.impulse.at("knee_force");
  }
  EXPECT_LT(reduce, reactive);
}

TEST_F(HarnessTest, RecordedTrialReplaysDemo) {
  const Demonstration& demo = test_strides_->demos[2];
  const TrialResult r =
      RunRecordedTrial(*model_, Config(ControlMode::kReduce), demo, 5, 2);
  ASSERT_EQ(r.ticks.size(), static_cast<size_t>(demo.length()));
  EXPECT_EQ(r.plan_violations, 0);
  const int force = (*model_)->ChannelIndex("knee_force");
  EXPECT_EQ(r.force, demo.samples.col(force));
  EXPECT_GT(r.ticks.back().phase_estimate, 0.85);

  Demonstration other = demo;
  other.channels[0].name = "renamed";
  EXPECT_THROW(RunRecordedTrial(*model_, Config(ControlMode::kReduce), other, 5, 2),
               FormatError);
  other = demo;
  other.sample_rate = 50.0;
  EXPECT_THROW(RunRecordedTrial(*model_, Config(ControlMode::kReduce), other, 5, 2),
               FormatError);
}

TEST_F(HarnessTest, WorldMismatchIsRejected) {
  WorldConfig fast;
  fast.sample_rate = 200.0;
  const World other(fast);
  std::mt19937_64 rng(1);
  EXPECT_THROW(RunClosedLoopTrial(other, *model_, Config(ControlMode::kReduce),
                                  other.SampleStride(rng), 1, 0),
               FormatError);
}

TEST(PlanInvariantTest, DetectsViolations) {
  ControlProblem p;
  p.lower = Eigen::Vector2d(-1, -1);
  p.upper = Eigen::Vector2d(1, 1);
  ControlPlan plan;
  plan.u_weights = Eigen::Vector2d(0.5, -0.5);
  plan.cost_reactive = 1.0;
  plan.cost_achieved = 0.9;
  EXPECT_TRUE(PlanSatisfiesInvariants(plan, p));
  plan.cost_achieved = 1.0 + 1e-11;
  EXPECT_FALSE(PlanSatisfiesInvariants(plan, p));
  plan.cost_achieved = 0.9;
  plan.u_weights[1] = -1.0 - 1e-12;
  EXPECT_FALSE(PlanSatisfiesInvariants(plan, p));
}

}  // namespace
}  // namespace mpip
