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

#include <algorithm>
#include <cmath>
#include <random>
#include <utility>

#include "mpip/errors.h"
#include "mpip/filter.h"

namespace mpip {
namespace {

constexpr std::uint64_t kNoiseStream = 0x6f62736e6f697365ULL;

int RequireChannel(const IPModel& model, const std::string& name) {
  const auto it = std::find_if(model.channels.begin(), model.channels.end(),
                               [&](const ChannelSpec& c) { return c.name == name; });
  if (it == model.channels.end()) {
    throw ConfigError("model has no channel '" + name + "'");
  }
  return static_cast<int>(it - model.channels.begin());
}

void FillMetrics(TrialResult& result, const std::string& force_name,
                 const std::string& control_name, double dt, int event_index) {
  const auto fill = [&](const std::string& name, const Eigen::VectorXd& v) {
    const std::span<const double> s(v.data(), static_cast<std::size_t>(v.size()));
    result.metrics.impulse[name] = Impulse(s, dt);
    result.metrics.peak[name] = Peak(s);
    result.metrics.value_at_event[name] = ValueAtEvent(s, event_index);
  };
  fill(force_name, result.force);
  fill(control_name, result.control);
}

int EventIndex(double phase, int samples) {
  return static_cast<int>(
      std::lround(std::clamp(phase, 0.0, 1.0) * static_cast<double>(samples - 1)));
}

double PredictAt(const FilterSession& filter, int channel, double phase,
                 double* stddev) {
  const TrajectoryPrediction p =
      PredictTrajectory(filter.ensemble(), filter.model(), channel, phase,
                        phase, 1);
  *stddev = p.stddev[0];
  return p.mean[0];
}

}  // namespace

std::string_view ToString(ControlMode mode) {
  switch (mode) {
    case ControlMode::kReduce: return "reduce";
    case ControlMode::kIncrease: return "increase";
    case ControlMode::kSymmetry: return "symmetry";
    case ControlMode::kReactive: return "reactive";
    case ControlMode::kPassive: return "passive";
  }
  return "reduce";
}

ControlMode ParseControlMode(std::string_view name) {
  if (name == "reduce") return ControlMode::kReduce;
  if (name == "increase") return ControlMode::kIncrease;
  if (name == "symmetry") return ControlMode::kSymmetry;
  if (name == "reactive") return ControlMode::kReactive;
  if (name == "passive") return ControlMode::kPassive;
  throw ConfigError("unknown objective '" + std::string(name) + "'");
}

CostConfig MakeCostConfig(const IPModel& model, const ExperimentConfig& config) {
  CostConfig cost;
  cost.horizon_x = config.horizon_x;
  cost.horizon_u = config.horizon_u;
  cost.rho = config.rho;
  cost.control_channel = model.ControlChannel();
  switch (config.mode) {
    case ControlMode::kIncrease:
      cost.objective = Objective::kMaximize;
      cost.target_channel = RequireChannel(model, config.target_channel);
      break;
    case ControlMode::kSymmetry:
      cost.objective = Objective::kTrackReference;
      cost.target_channel = RequireChannel(model, config.symmetry_channel);
      cost.reference_channel = RequireChannel(model, config.reference_channel);
      break;
    default:
      cost.objective = Objective::kMinimize;
      cost.target_channel = RequireChannel(model, config.target_channel);
      break;
  }
  return cost;
}

bool PlanSatisfiesInvariants(const ControlPlan& plan,
                             const ControlProblem& problem) {
  if (!(plan.cost_achieved <= plan.cost_reactive + 1e-12)) return false;
  for (Eigen::Index i = 0; i < plan.u_weights.size(); ++i) {
    if (!(plan.u_weights[i] >= problem.lower[i] &&
          plan.u_weights[i] <= problem.upper[i])) {
      return false;
    }
  }
  return true;
}

TrialResult RunClosedLoopTrial(const World& world,
                               std::shared_ptr<const IPModel> model,
                               const ExperimentConfig& config,
                               const StrideParams& stride, std::uint64_t seed,
                               int trial_index) {
  const int samples = stride.samples;
  const double rate = world.config().sample_rate;
  const double dt = 1.0 / rate;
  if (std::abs(model->sample_rate - rate) > 1e-9 * rate) {
    throw FormatError("model and world sample rates differ");
  }

  // Model observed channels are matched to world channels by name.
  const std::vector<int> mask = ChannelsWithRole(model->channels, Role::kObserved);
  std::vector<int> world_index;
  for (int ch : mask) {
    const int w = FindChannel(world.schema(), model->channels[ch].name);
    if (w < 0 || w >= world.config().num_observed) {
      throw FormatError("world has no observed channel '" +
                        model->channels[ch].name + "'");
    }
    world_index.push_back(w);
  }
  const int force_ch = RequireChannel(*model, config.target_channel);

  MpcOptions options = config.mpc;
  if (config.mode == ControlMode::kReactive) options.optimize = false;
  MpcSession session(model, MakeCostConfig(*model, config), options,
                     FilterOptions{config.perturb, 0.0}, seed);
  Rng noise_rng(DeriveSeed(seed, kNoiseStream));
  std::normal_distribution<double> normal(0.0, 1.0);

  const Eigen::VectorXd phases = LinearPhases(samples);
  const bool passive = config.mode == ControlMode::kPassive;

  double applied;
  if (passive) {
    applied = world.NominalControl(0.0);
  } else {
    const Eigen::VectorXd mean = session.filter().mean_state();
    const double phase = std::clamp(mean[kPhaseIndex], 0.0, 1.0);
    applied = ControlOutput(ReactivePlan(session.BuildProblem(mean, phase), phase),
                            phase, model->basis, session.cost().control_channel);
  }

  TrialResult result;
  result.phases = phases;
  result.control.resize(samples);
  result.force.resize(samples);
  result.observed.resize(samples, world.config().num_observed);
  result.ticks.reserve(static_cast<std::size_t>(samples));

  Observation obs;
  obs.channels = mask;
  obs.values.resize(static_cast<Eigen::Index>(mask.size()));
  for (int t = 0; t < samples; ++t) {
    const double phi = phases[t];
    Eigen::VectorXd y = world.Observe(phi, applied, stride);
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      y[i] += world.config().noise_std * normal(noise_rng);
    }
    result.observed.row(t) = y.transpose();
    for (std::size_t i = 0; i < mask.size(); ++i) {
      obs.values[static_cast<Eigen::Index>(i)] = y[world_index[i]];
    }
    obs.timestamp = t * dt;

    const StepResult step = session.Step(obs, t == 0 ? 0.0 : dt);
    const Eigen::VectorXd mean = session.filter().mean_state();
    const ControlProblem problem =
        session.BuildProblem(mean, step.diagnostics.phase);

    TickRecord tick;
    tick.trial = trial_index;
    tick.tick = t;
    tick.phase_true = phi;
    tick.phase_estimate = step.diagnostics.phase;
    tick.control = applied;
    tick.cost_achieved = step.plan.cost_achieved;
    tick.cost_reactive = step.plan.cost_reactive;
    tick.iterations = step.plan.iterations;
    tick.fallback = step.plan.fallback;
    tick.plan_ok = PlanSatisfiesInvariants(step.plan, problem);
    tick.timing = step.diagnostics;
    tick.force_true = world.Force(phi, applied, stride);
    tick.force_predicted = PredictAt(session.filter(), force_ch,
                                     step.diagnostics.phase,
                                     &tick.force_predicted_std);
    tick.next_control =
        passive ? world.NominalControl(phases[std::min(t + 1, samples - 1)])
                : step.control;

    if (!tick.plan_ok) ++result.plan_violations;
    result.max_step_ms = std::max(result.max_step_ms, step.diagnostics.total_ms);
    result.control[t] = applied;
    result.force[t] = tick.force_true;
    result.ticks.push_back(tick);
    applied = tick.next_control;
  }

  result.metrics.trial_id = "trial_" + std::to_string(trial_index);
  result.metrics.mode = std::string(ToString(config.mode));
  FillMetrics(result, config.target_channel,
              model->channels[session.cost().control_channel].name, dt,
              EventIndex(config.event_phase >= 0.0 ? config.event_phase
                                                   : world.event_phase(),
                         samples));
  return result;
}

TrialResult RunRecordedTrial(std::shared_ptr<const IPModel> model,
                             const ExperimentConfig& config,
                             const Demonstration& demo, std::uint64_t seed,
                             int trial_index) {
  if (demo.channels != model->channels) {
    throw FormatError("recording schema differs from the model schema");
  }
  if (std::abs(model->sample_rate - demo.sample_rate) >
      1e-9 * model->sample_rate) {
    throw FormatError("recording and model sample rates differ");
  }
  const int samples = static_cast<int>(demo.samples.rows());
  const double dt = 1.0 / demo.sample_rate;
  const int force_ch = RequireChannel(*model, config.target_channel);

  MpcOptions options = config.mpc;
  if (config.mode == ControlMode::kReactive) options.optimize = false;
  MpcSession session(model, MakeCostConfig(*model, config), options,
                     FilterOptions{config.perturb, 0.0}, seed);
  const int control_ch = session.cost().control_channel;

  const std::vector<int> mask = ChannelsWithRole(model->channels, Role::kObserved);
  Observation obs;
  obs.channels = mask;
  obs.values.resize(static_cast<Eigen::Index>(mask.size()));

  TrialResult result;
  result.phases = demo.phases;
  result.control.resize(samples);
  result.force = demo.samples.col(force_ch);
  result.observed.resize(samples, static_cast<Eigen::Index>(mask.size()));
  for (int t = 0; t < samples; ++t) {
    for (std::size_t i = 0; i < mask.size(); ++i) {
      obs.values[static_cast<Eigen::Index>(i)] = demo.samples(t, mask[i]);
    }
    result.observed.row(t) = obs.values.transpose();
    obs.timestamp = t * dt;
    const StepResult step = session.Step(obs, t == 0 ? 0.0 : dt);
    const ControlProblem problem =
        session.BuildProblem(session.filter().mean_state(), step.diagnostics.phase);

    TickRecord tick;
    tick.trial = trial_index;
    tick.tick = t;
    tick.phase_true = demo.phases[t];
    tick.phase_estimate = step.diagnostics.phase;
    tick.control = demo.samples(t, control_ch);
    tick.next_control = step.control;
    tick.cost_achieved = step.plan.cost_achieved;
    tick.cost_reactive = step.plan.cost_reactive;
    tick.iterations = step.plan.iterations;
    tick.fallback = step.plan.fallback;
    tick.plan_ok = PlanSatisfiesInvariants(step.plan, problem);
    tick.timing = step.diagnostics;
    tick.force_true = demo.samples(t, force_ch);
    tick.force_predicted = PredictAt(session.filter(), force_ch,
                                     step.diagnostics.phase,
                                     &tick.force_predicted_std);
    if (!tick.plan_ok) ++result.plan_violations;
    result.max_step_ms = std::max(result.max_step_ms, step.diagnostics.total_ms);
    result.control[t] = step.control;
    result.ticks.push_back(tick);
  }

  result.metrics.trial_id = "trial_" + std::to_string(trial_index);
  result.metrics.mode = std::string(ToString(config.mode));
  FillMetrics(result, config.target_channel, model->channels[control_ch].name,
              dt, EventIndex(config.event_phase >= 0.0 ? config.event_phase : 0.5,
                             samples));
  return result;
}

}  // namespace mpip
