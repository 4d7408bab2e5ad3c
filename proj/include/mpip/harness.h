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

#ifndef MPIP_HARNESS_H_
#define MPIP_HARNESS_H_

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "mpip/metrics.h"
#include "mpip/model.h"
#include "mpip/mpc.h"
#include "mpip/synth.h"

namespace mpip {

// reduce/increase minimize/maximize the target force, symmetry tracks the
// intact ankle with the prosthesis ankle, reactive emits the posterior-mean
// control, passive replays the nominal control law.
enum class ControlMode { kReduce, kIncrease, kSymmetry, kReactive, kPassive };

std::string_view ToString(ControlMode mode);
ControlMode ParseControlMode(std::string_view name);

struct ExperimentConfig {
  ControlMode mode = ControlMode::kReduce;
  std::string target_channel = "knee_force";
  std::string symmetry_channel = "ankle_prosthesis";
  std::string reference_channel = "ankle_intact";
  double horizon_x = 0.25;
  double horizon_u = 0.10;
  double rho = 1.0;
  bool perturb = true;
  double event_phase = -1.0;  // < 0: the world's event, 0.5 for recordings
  MpcOptions mpc;
};

// Cost settings for a mode (reduce/increase/symmetry); reactive and passive
// reuse the reduce cost for logging.
CostConfig MakeCostConfig(const IPModel& model, const ExperimentConfig& config);

struct TickRecord {
  int trial = 0;
  int tick = 0;
  double phase_true = 0.0;
  double phase_estimate = 0.0;
  double control = 0.0;       // applied at this tick
  double next_control = 0.0;  // emitted for the next tick
  double cost_achieved = 0.0;
  double cost_reactive = 0.0;
  int iterations = 0;
  bool fallback = false;
  bool plan_ok = true;  // cost and box invariants held
  double force_true = 0.0;
  double force_predicted = 0.0;
  double force_predicted_std = 0.0;
  StepDiagnostics timing;  // wall clock, not part of reproducible logs
};

struct TrialResult {
  TrialMetrics metrics;
  std::vector<TickRecord> ticks;
  Eigen::VectorXd phases;
  Eigen::VectorXd control;
  Eigen::VectorXd force;
  Eigen::MatrixXd observed;  // T x num_observed, noisy
  int plan_violations = 0;
  double max_step_ms = 0.0;
};

// Live trial on the synthetic world: each sample the world is observed under
// the control applied so far, the session steps, and the emitted control is
// applied from the next sample on. Ground-truth force follows the coupling
// law for the applied control.
TrialResult RunClosedLoopTrial(const World& world,
                               std::shared_ptr<const IPModel> model,
                               const ExperimentConfig& config,
                               const StrideParams& stride,
                               std::uint64_t seed, int trial_index);

// Replays a recorded demonstration through filtering and planning. Metrics
// describe the recorded latent and emitted control channels.
TrialResult RunRecordedTrial(std::shared_ptr<const IPModel> model,
                             const ExperimentConfig& config,
                             const Demonstration& demo, std::uint64_t seed,
                             int trial_index);

// Plan cost within 1e-12 of the reactive cost and weights inside the box.
bool PlanSatisfiesInvariants(const ControlPlan& plan,
                             const ControlProblem& problem);

}  // namespace mpip

#endif  // MPIP_HARNESS_H_
