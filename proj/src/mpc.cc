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

#include "mpip/mpc.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <string>

#include "mpip/errors.h"

namespace mpip {
namespace {

using Clock = std::chrono::steady_clock;

double Milliseconds(Clock::time_point a, Clock::time_point b) {
  return std::chrono::duration<double, std::milli>(b - a).count();
}

double Sign(Objective objective) {
  return objective == Objective::kMaximize ? -1.0 : 1.0;
}

}  // namespace

std::string_view ToString(Objective objective) {
  switch (objective) {
    case Objective::kMinimize:
      return "minimize";
    case Objective::kMaximize:
      return "maximize";
    case Objective::kTrackReference:
      return "track_reference";
  }
  return "unknown";
}

Objective ParseObjective(std::string_view name) {
  if (name == "minimize") return Objective::kMinimize;
  if (name == "maximize") return Objective::kMaximize;
  if (name == "track_reference") return Objective::kTrackReference;
  throw ConfigError("unknown objective '" + std::string(name) + "'");
}

void ValidateCostConfig(const CostConfig& config) {
  if (!(config.horizon_x >= 0.0 && config.horizon_x <= 1.0) ||
      !(config.horizon_u >= 0.0 && config.horizon_u <= 1.0)) {
    throw ConfigError("horizons must lie in [0, 1]");
  }
  if (!(config.rho >= 0.0)) throw ConfigError("rho must be nonnegative");
  if (config.target_channel < 0) throw ConfigError("no target channel set");
}

// ---------------------------------------------------------------------------

Coupling ComputeCoupling(const Eigen::MatrixXd& covariance,
                         const IPModel& model, int target_channel,
                         int control_channel, double ridge_scale) {
  const auto& layout = model.basis.layout();
  const int tx = model.StateOffset(target_channel);
  const int nx = layout.block_size(target_channel);
  const int tu = model.StateOffset(control_channel);
  const int nu = layout.block_size(control_channel);
  if (covariance.rows() != model.state_size() ||
      covariance.cols() != model.state_size()) {
    throw DomainError("covariance does not match the model state size");
  }
  Eigen::MatrixXd suu = covariance.block(tu, tu, nu, nu);
  const Eigen::MatrixXd sux = covariance.block(tu, tx, nu, nx);
  const double ridge = ridge_scale * suu.trace() / nu;
  suu.diagonal().array() += ridge;
  Eigen::LLT<Eigen::MatrixXd> llt(suu);
  if (llt.info() != Eigen::Success || !(ridge > 0.0)) {
    throw NumericalError(
        "control weight covariance is singular; the demonstrations carry no "
        "control variation");
  }
  Coupling coupling;
  coupling.gain = llt.solve(sux).transpose();
  if (!coupling.gain.allFinite()) {
    throw NumericalError("coupling gain is not finite");
  }
  return coupling;
}

Eigen::VectorXd CoupleWeights(const GaussianMoments& prior,
                              const IPModel& model, int target_channel,
                              int control_channel,
                              const Eigen::VectorXd& u_weights,
                              double ridge_scale) {
  const Coupling coupling = ComputeCoupling(
      prior.covariance, model, target_channel, control_channel, ridge_scale);
  const int nx = model.basis.layout().block_size(target_channel);
  const int nu = model.basis.layout().block_size(control_channel);
  if (u_weights.size() != nu) throw DomainError("control weights have wrong size");
  return coupling.Apply(prior.mean.segment(model.StateOffset(target_channel), nx),
                        prior.mean.segment(model.StateOffset(control_channel), nu),
                        u_weights);
}

// ---------------------------------------------------------------------------

Eigen::VectorXd ControlProblem::TargetWeights(
    const Eigen::VectorXd& u_weights) const {
  return target_mean + gain * (u_weights - control_mean);
}

double ControlProblem::TargetTerm(const Eigen::VectorXd& u_weights) const {
  Eigen::VectorXd r = TargetWeights(u_weights);
  if (objective == Objective::kTrackReference && reference.size() > 0) {
    r -= reference;
  }
  return Sign(objective) * psi_x.dot(r.cwiseAbs2());
}

double ControlProblem::ControlTerm(const Eigen::VectorXd& u_weights) const {
  return rho * psi_u.dot((u_weights - reactive).cwiseAbs2());
}

double ControlProblem::Value(const Eigen::VectorXd& u_weights) const {
  return TargetTerm(u_weights) + ControlTerm(u_weights);
}

Eigen::VectorXd ControlProblem::Gradient(const Eigen::VectorXd& u_weights) const {
  Eigen::VectorXd r = TargetWeights(u_weights);
  if (objective == Objective::kTrackReference && reference.size() > 0) {
    r -= reference;
  }
  return 2.0 * Sign(objective) * gain.transpose() * psi_x.cwiseProduct(r) +
         2.0 * rho * psi_u.cwiseProduct(u_weights - reactive);
}

Eigen::MatrixXd ControlProblem::Hessian(const Eigen::VectorXd&) const {
  Eigen::MatrixXd h =
      2.0 * Sign(objective) * gain.transpose() * psi_x.asDiagonal() * gain;
  h.diagonal() += 2.0 * rho * psi_u;
  return h;
}

Eigen::VectorXd HorizonPsi(const PsiCache& cache, double phase, double horizon,
                           PhaseMode mode) {
  phase = std::clamp(phase, 0.0, 1.0);
  const double end = phase + horizon;
  if (end <= 1.0) return cache.Query(phase, end);
  if (mode == PhaseMode::kClamp) return cache.Query(phase, 1.0);
  return cache.Query(phase, 1.0) + cache.Query(0.0, std::min(end - 1.0, 1.0));
}

// ---------------------------------------------------------------------------

ControlPlan ReactivePlan(const ControlProblem& problem, double phase) {
  ControlPlan plan;
  plan.reactive_weights = problem.reactive;
  plan.u_weights = problem.reactive;
  plan.cost_reactive = problem.Value(problem.reactive);
  plan.cost_achieved = plan.cost_reactive;
  plan.target_term = problem.TargetTerm(problem.reactive);
  plan.phase_at_plan = phase;
  return plan;
}

ControlPlan OptimizePlan(const ControlProblem& problem, double phase,
                         const BoxOptions& options,
                         const Eigen::VectorXd* warm_start) {
  ControlPlan plan = ReactivePlan(problem, phase);
  try {
    Eigen::VectorXd start = problem.reactive;
    if (warm_start != nullptr && warm_start->size() == start.size()) {
      const Eigen::VectorXd candidate =
          ProjectToBox(*warm_start, problem.lower, problem.upper);
      if (problem.Value(candidate) < plan.cost_reactive) start = candidate;
    }
    const BoxResult result =
        MinimizeInBox(problem, problem.lower, problem.upper, start, options);
    if (!std::isfinite(result.value) || !result.x.allFinite() ||
        result.value > plan.cost_reactive) {
      plan.fallback = true;
      plan.warning = "optimizer produced no admissible improvement";
      return plan;
    }
    plan.u_weights = result.x;
    plan.cost_achieved = result.value;
    plan.target_term = problem.TargetTerm(result.x);
    plan.iterations = result.iterations;
    if (result.budget_exhausted) plan.warning = "time budget exhausted";
  } catch (const Error& e) {
    plan = ReactivePlan(problem, phase);
    plan.fallback = true;
    plan.warning = e.what();
  }
  return plan;
}

double ControlOutput(const ControlPlan& plan, double phase,
                     const BasisModel& basis, int control_channel) {
  return basis.Evaluate(std::clamp(phase, 0.0, 1.0), control_channel)
      .dot(plan.u_weights);
}

// ---------------------------------------------------------------------------

MpcSession::MpcSession(std::shared_ptr<const IPModel> model, CostConfig cost,
                       MpcOptions options, FilterOptions filter_options,
                       std::uint64_t seed)
    : model_(std::move(model)),
      cost_(std::move(cost)),
      options_(options),
      filter_(model_, filter_options, seed) {
  ValidateCostConfig(cost_);
  if (cost_.control_channel < 0) cost_.control_channel = model_->ControlChannel();
  const auto& layout = model_->basis.layout();
  if (cost_.target_channel >= model_->num_channels() ||
      cost_.control_channel >= model_->num_channels()) {
    throw ConfigError("cost channel out of range");
  }
  if (model_->channels[cost_.control_channel].role != Role::kControl) {
    throw ConfigError("channel '" + model_->channels[cost_.control_channel].name +
                      "' is not a control channel");
  }
  if (cost_.objective == Objective::kTrackReference) {
    const int nx = layout.block_size(cost_.target_channel);
    if (cost_.reference_channel >= 0) {
      if (layout.block_size(cost_.reference_channel) != nx) {
        throw ConfigError("reference channel basis size differs from target");
      }
    } else if (!cost_.reference || cost_.reference->size() != nx) {
      throw ConfigError("tracking objective needs reference weights");
    }
  }
  try {
    coupling_ = ComputeCoupling(PriorStatistics(*model_).covariance, *model_,
                                cost_.target_channel, cost_.control_channel,
                                options_.covariance_ridge);
  } catch (const NumericalError& e) {
    coupling_valid_ = false;
    coupling_error_ = e.what();
    coupling_.gain = Eigen::MatrixXd::Zero(layout.block_size(cost_.target_channel),
                                           layout.block_size(cost_.control_channel));
  }
  psi_target_ = PsiCache(model_->basis, cost_.target_channel,
                         options_.psi_grid_points);
  psi_control_ = PsiCache(model_->basis, cost_.control_channel,
                          options_.psi_grid_points);
}

void MpcSession::set_coupling(Coupling coupling) {
  const auto& layout = model_->basis.layout();
  if (coupling.gain.rows() != layout.block_size(cost_.target_channel) ||
      coupling.gain.cols() != layout.block_size(cost_.control_channel)) {
    throw DomainError("coupling gain has wrong shape");
  }
  coupling_ = std::move(coupling);
  coupling_valid_ = true;
  coupling_error_.clear();
}

ControlProblem MpcSession::BuildProblem(const Eigen::VectorXd& mean_state,
                                        double phase) const {
  const auto& layout = model_->basis.layout();
  const int target = cost_.target_channel;
  const int control = cost_.control_channel;
  const int nx = layout.block_size(target);
  const int nu = layout.block_size(control);

  ControlProblem problem;
  problem.gain = coupling_.gain;
  problem.target_mean = mean_state.segment(model_->StateOffset(target), nx);
  problem.control_mean = mean_state.segment(model_->StateOffset(control), nu);
  problem.lower = model_->weight_min.segment(layout.offset(control), nu);
  problem.upper = model_->weight_max.segment(layout.offset(control), nu);
  problem.reactive = ProjectToBox(problem.control_mean, problem.lower, problem.upper);
  problem.psi_x = HorizonPsi(psi_target_, phase, cost_.horizon_x, model_->phase_mode);
  problem.psi_u = HorizonPsi(psi_control_, phase, cost_.horizon_u, model_->phase_mode);
  problem.rho = cost_.rho;
  problem.objective = cost_.objective;
  if (cost_.objective == Objective::kTrackReference) {
    problem.reference =
        cost_.reference_channel >= 0
            ? mean_state.segment(model_->StateOffset(cost_.reference_channel), nx)
                  .eval()
            : *cost_.reference;
  }
  return problem;
}

StepResult MpcSession::Step(const Observation& observation, double dt) {
  StepResult result;
  auto& diag = result.diagnostics;
  if (dt < 0.0) throw DomainError("negative step duration");
  const auto t0 = Clock::now();
  if (dt > 0.0) filter_.Predict(dt);
  const auto t1 = Clock::now();
  if (!observation.channels.empty()) filter_.Update(observation);
  const auto t2 = Clock::now();

  const Eigen::VectorXd mean = filter_.mean_state();
  const double phase = std::clamp(mean[kPhaseIndex], 0.0, 1.0);
  const ControlProblem problem = BuildProblem(mean, phase);
  if (!options_.optimize) {
    result.plan = ReactivePlan(problem, phase);
  } else if (!coupling_valid_) {
    result.plan = ReactivePlan(problem, phase);
    result.plan.fallback = true;
    result.plan.warning = coupling_error_;
  } else {
    const Eigen::VectorXd* warm =
        options_.warm_start && previous_plan_ ? &*previous_plan_ : nullptr;
    result.plan = OptimizePlan(problem, phase, options_.optimizer, warm);
  }
  previous_plan_ = result.plan.u_weights;
  const auto t3 = Clock::now();

  result.control =
      ControlOutput(result.plan, phase, model_->basis, cost_.control_channel);
  const auto t4 = Clock::now();

  diag.phase = phase;
  diag.cost_achieved = result.plan.cost_achieved;
  diag.cost_reactive = result.plan.cost_reactive;
  diag.iterations = result.plan.iterations;
  diag.fallback = result.plan.fallback;
  diag.predict_ms = Milliseconds(t0, t1);
  diag.update_ms = Milliseconds(t1, t2);
  diag.optimize_ms = Milliseconds(t2, t3);
  diag.output_ms = Milliseconds(t3, t4);
  diag.total_ms = Milliseconds(t0, t4);
  return result;
}

}  // namespace mpip
