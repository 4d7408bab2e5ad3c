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

#include "mpip/box_optimizer.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <vector>

#include "mpip/errors.h"

namespace mpip {

Eigen::VectorXd ProjectToBox(const Eigen::VectorXd& x,
                             const Eigen::VectorXd& lower,
                             const Eigen::VectorXd& upper) {
  return x.cwiseMax(lower).cwiseMin(upper);
}

BoxResult MinimizeInBox(const BoxObjective& objective,
                        const Eigen::VectorXd& lower,
                        const Eigen::VectorXd& upper, const Eigen::VectorXd& x0,
                        const BoxOptions& options) {
  const Eigen::Index n = x0.size();
  if (lower.size() != n || upper.size() != n) {
    throw DomainError("box bounds do not match the start point");
  }
  if ((lower.array() > upper.array()).any()) {
    throw DomainError("box lower bound exceeds upper bound");
  }
  const auto start = std::chrono::steady_clock::now();

  BoxResult result;
  result.x = ProjectToBox(x0, lower, upper);
  result.value = objective.Value(result.x);

  std::vector<Eigen::Index> free;
  for (; result.iterations < options.max_iterations; ++result.iterations) {
    if (options.time_budget_ms > 0.0) {
      const std::chrono::duration<double, std::milli> elapsed =
          std::chrono::steady_clock::now() - start;
      if (elapsed.count() > options.time_budget_ms) {
        result.budget_exhausted = true;
        break;
      }
    }

    const Eigen::VectorXd& x = result.x;
    const Eigen::VectorXd g = objective.Gradient(x);
    const Eigen::VectorXd projected_gradient =
        x - ProjectToBox(x - g, lower, upper);
    const double pg_norm = projected_gradient.lpNorm<Eigen::Infinity>();
    if (pg_norm <= options.gradient_tolerance) {
      result.converged = true;
      break;
    }

    // variables held at a bound by the gradient
    const double eps = std::min(1e-6, projected_gradient.norm());
    free.clear();
    for (Eigen::Index i = 0; i < n; ++i) {
      const bool at_lower = x[i] <= lower[i] + eps && g[i] > 0.0;
      const bool at_upper = x[i] >= upper[i] - eps && g[i] < 0.0;
      if (!at_lower && !at_upper) free.push_back(i);
    }

    Eigen::VectorXd direction = -g;
    if (!free.empty()) {
      const Eigen::MatrixXd hessian = objective.Hessian(x);
      const Eigen::Index m = static_cast<Eigen::Index>(free.size());
      Eigen::MatrixXd reduced(m, m);
      Eigen::VectorXd reduced_gradient(m);
      for (Eigen::Index a = 0; a < m; ++a) {
        reduced_gradient[a] = g[free[a]];
        for (Eigen::Index b = 0; b < m; ++b) {
          reduced(a, b) = hessian(free[a], free[b]);
        }
      }
      Eigen::LLT<Eigen::MatrixXd> llt(reduced);
      if (llt.info() == Eigen::Success) {
        const Eigen::VectorXd step = -llt.solve(reduced_gradient);
        if (step.allFinite() && step.dot(reduced_gradient) < 0.0) {
          for (Eigen::Index a = 0; a < m; ++a) direction[free[a]] = step[a];
        }
      }
    }

    bool accepted = false;
    double alpha = 1.0;
    for (int k = 0; k < 60; ++k, alpha *= 0.5) {
      const Eigen::VectorXd candidate =
          ProjectToBox(x + alpha * direction, lower, upper);
      const double decrease = g.dot(candidate - x);
      if (!(decrease < 0.0)) {
        if ((candidate - x).lpNorm<Eigen::Infinity>() == 0.0) break;
        continue;
      }
      const double value = objective.Value(candidate);
      if (std::isfinite(value) &&
          value <= result.value + options.armijo * decrease &&
          value < result.value) {
        result.x = candidate;
        result.value = value;
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
  }
  return result;
}

}  // namespace mpip
