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

#ifndef MPIP_BOX_OPTIMIZER_H_
#define MPIP_BOX_OPTIMIZER_H_

#include <Eigen/Dense>

namespace mpip {

// Twice-differentiable objective for the box-constrained solver.
class BoxObjective {
 public:
  virtual ~BoxObjective() = default;
  virtual double Value(const Eigen::VectorXd& x) const = 0;
  virtual Eigen::VectorXd Gradient(const Eigen::VectorXd& x) const = 0;
  virtual Eigen::MatrixXd Hessian(const Eigen::VectorXd& x) const = 0;
};

struct BoxOptions {
  int max_iterations = 50;
  double gradient_tolerance = 1e-8;
  double time_budget_ms = 0.0;  // <= 0: no wall-clock limit
  double armijo = 1e-4;
};

struct BoxResult {
  Eigen::VectorXd x;
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
  bool budget_exhausted = false;
};

Eigen::VectorXd ProjectToBox(const Eigen::VectorXd& x,
                             const Eigen::VectorXd& lower,
                             const Eigen::VectorXd& upper);

// Projected Newton method (Bertsekas): Newton steps on the free variables
// when the reduced Hessian is positive definite, projected steepest descent
// otherwise, with an Armijo search along the projection arc. Every accepted
// iterate lowers the objective, so the result never exceeds the value at
// the projected starting point.
BoxResult MinimizeInBox(const BoxObjective& objective,
                        const Eigen::VectorXd& lower,
                        const Eigen::VectorXd& upper, const Eigen::VectorXd& x0,
                        const BoxOptions& options);

}  // namespace mpip

#endif  // MPIP_BOX_OPTIMIZER_H_
