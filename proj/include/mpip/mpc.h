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

#ifndef MPIP_MPC_H_
#define MPIP_MPC_H_

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include <Eigen/Dense>

#include "mpip/basis.h"
#include "mpip/box_optimizer.h"
#include "mpip/filter.h"
#include "mpip/model.h"

namespace mpip {

enum class Objective { kMinimize, kMaximize, kTrackReference };

std::string_view ToString(Objective objective);
Objective ParseObjective(std::string_view name);

struct CostConfig {
  Objective objective = Objective::kMinimize;
  int target_channel = -1;   // variable of interest, e.g. knee force
  int control_channel = -1;  // < 0 selects the model's control channel
  double horizon_x = 0.25;   // phase length of the target integral
  double horizon_u = 0.10;   // phase length of the control-change integral
  double rho = 1.0;          // weight of the control-change term
  // TrackReference: fixed reference weights, or the posterior mean of
  // `reference_channel` refreshed every tick when that is >= 0
  std::optional<Eigen::VectorXd> reference;
  int reference_channel = -1;
};

void ValidateCostConfig(const CostConfig& config);

// Conditional-mean map from control weights to target weights:
//   w_x = mu_x + Sigma_xu (Sigma_uu + ridge I)^-1 (w_u - mu_u)
// with ridge = ridge_scale * trace(Sigma_uu) / B_u.
struct Coupling {
  Eigen::MatrixXd gain;  // B_x x B_u

  Eigen::VectorXd Apply(const Eigen::VectorXd& target_mean,
                        const Eigen::VectorXd& control_mean,
                        const Eigen::VectorXd& u_weights) const {
    return target_mean + gain * (u_weights - control_mean);
  }
};

// `covariance` is over full latent states. Throws NumericalError when the
// regularized control block cannot be factored.
Coupling ComputeCoupling(const Eigen::MatrixXd& covariance,
                         const IPModel& model, int target_channel,
                         int control_channel, double ridge_scale = 1e-8);

Eigen::VectorXd CoupleWeights(const GaussianMoments& prior,
                              const IPModel& model, int target_channel,
                              int control_channel,
                              const Eigen::VectorXd& u_weights,
                              double ridge_scale = 1e-8);

// One tick's phase-domain cost in the control weights w_u:
//   J = s * sum_b psi_x[b] (w_x[b] - ref[b])^2 + rho * sum_b psi_u[b] dw[b]^2
// with w_x the coupled target weights, dw = w_u - reactive, s = -1 for
// Maximize, and ref = 0 unless tracking a reference.
class ControlProblem : public BoxObjective {
 public:
  Eigen::MatrixXd gain;
  Eigen::VectorXd target_mean;
  Eigen::VectorXd control_mean;
  Eigen::VectorXd reactive;
  Eigen::VectorXd psi_x;
  Eigen::VectorXd psi_u;
  Eigen::VectorXd reference;  // empty unless tracking
  double rho = 1.0;
  Objective objective = Objective::kMinimize;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  Eigen::VectorXd TargetWeights(const Eigen::VectorXd& u_weights) const;
  // First (target) term of the cost, including the objective's sign.
  double TargetTerm(const Eigen::VectorXd& u_weights) const;
  double ControlTerm(const Eigen::VectorXd& u_weights) const;

  double Value(const Eigen::VectorXd& u_weights) const override;
  Eigen::VectorXd Gradient(const Eigen::VectorXd& u_weights) const override;
  Eigen::MatrixXd Hessian(const Eigen::VectorXd& u_weights) const override;
};

// Squared-basis integrals of one channel over [phase, phase + horizon]:
// clipped at 1 in clamp mode, split across the wrap point in wrap mode.
Eigen::VectorXd HorizonPsi(const PsiCache& cache, double phase, double horizon,
                           PhaseMode mode);

struct ControlPlan {
  Eigen::VectorXd u_weights;
  Eigen::VectorXd reactive_weights;
  double cost_achieved = 0.0;
  double cost_reactive = 0.0;
  double target_term = 0.0;  // first cost term at u_weights
  double phase_at_plan = 0.0;
  int iterations = 0;
  bool fallback = false;  // optimizer failed, reactive plan returned
  std::string warning;
};

struct MpcOptions {
  BoxOptions optimizer{50, 1e-8, 50.0, 1e-4};
  bool optimize = true;  // false: reactive plans only
  bool warm_start = true;
  int psi_grid_points = 1001;
  double covariance_ridge = 1e-8;
};

ControlPlan ReactivePlan(const ControlProblem& problem, double phase);

// Box-constrained local minimizer of the problem started from the reactive
// weights (or `warm_start` when it is cheaper). Never returns a plan costlier
// than the reactive one.
ControlPlan OptimizePlan(const ControlProblem& problem, double phase,
                         const BoxOptions& options,
                         const Eigen::VectorXd* warm_start = nullptr);

// u(phase) = Phi(phase)^T w_u* for the control channel.
double ControlOutput(const ControlPlan& plan, double phase,
                     const BasisModel& basis, int control_channel);

struct StepDiagnostics {
  double phase = 0.0;
  double cost_achieved = 0.0;
  double cost_reactive = 0.0;
  int iterations = 0;
  bool fallback = false;
  double predict_ms = 0.0;
  double update_ms = 0.0;
  double optimize_ms = 0.0;
  double output_ms = 0.0;
  double total_ms = 0.0;
};

struct StepResult {
  double control = 0.0;
  ControlPlan plan;
  StepDiagnostics diagnostics;
};

// Filtering plus receding-horizon control for one trial. Single writer.
class MpcSession {
 public:
  MpcSession(std::shared_ptr<const IPModel> model, CostConfig cost,
             MpcOptions options, FilterOptions filter_options,
             std::uint64_t seed);

  // predict -> update -> plan -> control output at the posterior phase.
  // An observation with an empty mask skips the update; dt == 0 skips the
  // prediction (first sample of a trial).
  StepResult Step(const Observation& observation, double dt);

  // Problem for the current posterior, exposed for inspection and tests.
  ControlProblem BuildProblem(const Eigen::VectorXd& mean_state,
                              double phase) const;

  const FilterSession& filter() const { return filter_; }
  FilterSession& mutable_filter() { return filter_; }
  const CostConfig& cost() const { return cost_; }
  const Coupling& coupling() const { return coupling_; }
  // Replaces the learned coupling, e.g. with a known physical gain.
  void set_coupling(Coupling coupling);
  bool coupling_valid() const { return coupling_valid_; }

 private:
  std::shared_ptr<const IPModel> model_;
  CostConfig cost_;
  MpcOptions options_;
  FilterSession filter_;
  Coupling coupling_;
  bool coupling_valid_ = true;
  std::string coupling_error_;
  PsiCache psi_target_;
  PsiCache psi_control_;
  std::optional<Eigen::VectorXd> previous_plan_;
};

}  // namespace mpip

#endif  // MPIP_MPC_H_
