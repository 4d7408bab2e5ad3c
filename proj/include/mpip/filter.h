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

#ifndef MPIP_FILTER_H_
#define MPIP_FILTER_H_

#include <cstdint>
#include <memory>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "mpip/model.h"

namespace mpip {

using Rng = std::mt19937_64;

// E latent states [phase, phase velocity, w], one per column.
struct Ensemble {
  Eigen::MatrixXd members;
  std::int64_t step = 0;

  int size() const { return static_cast<int>(members.cols()); }
};

Ensemble InitialEnsemble(const IPModel& model);

// Partial measurement of the observed channels listed in `channels`.
struct Observation {
  std::vector<int> channels;
  Eigen::VectorXd values;
  double timestamp = 0.0;
};

// Clamps member phases to [0, 1] or wraps them mod 1.
void ApplyPhaseMode(Ensemble& ensemble, PhaseMode mode);

// Constant-velocity transition: phase += velocity * dt * rate_scale, then
// additive Gaussian noise with the given standard deviations.
void Predict(Ensemble& ensemble, double dt, const ProcessNoise& noise,
             double rate_scale, PhaseMode mode, Rng& rng);

// Predicted observation h(x): each masked channel reconstructed at the
// member's own phase.
Eigen::VectorXd ObserveMember(const Eigen::Ref<const Eigen::VectorXd>& member,
                              std::span<const int> mask, const IPModel& model);

// Ensemble Kalman measurement update with the model's observation noise.
// With perturb == false every member sees the unperturbed observation.
void Update(Ensemble& ensemble, const Observation& observation,
            const IPModel& model, Rng& rng, bool perturb);

GaussianMoments Posterior(const Ensemble& ensemble);

struct TrajectoryPrediction {
  Eigen::VectorXd phases;
  Eigen::VectorXd mean;
  Eigen::VectorXd stddev;
};

// Per-member reconstruction of any channel over `resolution` phases spanning
// [lo, hi]; returns the pointwise mean and unbiased standard deviation.
TrajectoryPrediction PredictTrajectory(const Ensemble& ensemble,
                                       const IPModel& model, int channel,
                                       double lo, double hi, int resolution);

struct FilterOptions {
  bool perturb = true;
  // phase-velocity time scale; <= 0 uses the model sample rate, which makes
  // the stored velocity (phase per sample) advance correctly per second
  double rate_scale = 0.0;
};

// Single-writer filtering session over an immutable model.
class FilterSession {
 public:
  FilterSession(std::shared_ptr<const IPModel> model, FilterOptions options,
                std::uint64_t seed);

  void Predict(double dt);
  void Update(const Observation& observation);

  const IPModel& model() const { return *model_; }
  const Ensemble& ensemble() const { return ensemble_; }
  Ensemble& mutable_ensemble() { return ensemble_; }
  GaussianMoments posterior() const { return Posterior(ensemble_); }
  Eigen::VectorXd mean_state() const;
  double phase_estimate() const;
  // Clamp-mode trial has reached phase 1.
  bool completed() const;

 private:
  std::shared_ptr<const IPModel> model_;
  FilterOptions options_;
  Ensemble ensemble_;
  Rng rng_;
};

}  // namespace mpip

#endif  // MPIP_FILTER_H_
