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

#include "mpip/filter.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "mpip/errors.h"

namespace mpip {
namespace {

double WrapPhase(double phase) {
  double wrapped = phase - std::floor(phase);
  if (wrapped >= 1.0) wrapped = 0.0;
  return wrapped;
}

}  // namespace

Ensemble InitialEnsemble(const IPModel& model) {
  Ensemble ensemble;
  ensemble.members = model.ensemble0;
  return ensemble;
}

void ApplyPhaseMode(Ensemble& ensemble, PhaseMode mode) {
  auto phases = ensemble.members.row(kPhaseIndex);
  for (Eigen::Index j = 0; j < phases.size(); ++j) {
    phases[j] = mode == PhaseMode::kClamp ? std::clamp(phases[j], 0.0, 1.0)
                                          : WrapPhase(phases[j]);
  }
}

void Predict(Ensemble& ensemble, double dt, const ProcessNoise& noise,
             double rate_scale, PhaseMode mode, Rng& rng) {
  if (!(dt > 0.0)) throw DomainError("predict needs dt > 0");
  std::normal_distribution<double> normal(0.0, 1.0);
  auto& x = ensemble.members;
  const Eigen::Index num_weights = x.rows() - kWeightOffset;
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    x(kPhaseIndex, j) += x(kVelocityIndex, j) * dt * rate_scale;
    if (noise.phase_std > 0.0) x(kPhaseIndex, j) += noise.phase_std * normal(rng);
    if (noise.velocity_std > 0.0) {
      x(kVelocityIndex, j) += noise.velocity_std * normal(rng);
    }
    if (noise.weight_std > 0.0) {
      for (Eigen::Index b = 0; b < num_weights; ++b) {
        x(kWeightOffset + b, j) += noise.weight_std * normal(rng);
      }
    }
  }
  ApplyPhaseMode(ensemble, mode);
  ++ensemble.step;
}

Eigen::VectorXd ObserveMember(const Eigen::Ref<const Eigen::VectorXd>& member,
                              std::span<const int> mask, const IPModel& model) {
  const double phase = std::clamp(member[kPhaseIndex], 0.0, 1.0);
  const auto weights = member.tail(member.size() - kWeightOffset);
  Eigen::VectorXd out(mask.size());
  Eigen::VectorXd features;
  for (size_t i = 0; i < mask.size(); ++i) {
    const int d = mask[i];
    if (d < 0 || d >= model.num_channels()) {
      throw DomainError("unknown channel " + std::to_string(d));
    }
    if (model.channels[d].role != Role::kObserved) {
      throw DomainError("channel '" + model.channels[d].name +
                        "' is not observable");
    }
    features.resize(model.basis.layout().block_size(d));
    model.basis.EvaluateInto(phase, d, features);
    const auto& layout = model.basis.layout();
    out[i] = features.dot(weights.segment(layout.offset(d), layout.block_size(d)));
  }
  return out;
}

void Update(Ensemble& ensemble, const Observation& observation,
            const IPModel& model, Rng& rng, bool perturb) {
  const int num_members = ensemble.size();
  const int m = static_cast<int>(observation.channels.size());
  if (num_members < 2) throw DomainError("update needs at least 2 members");
  if (m == 0) throw DomainError("observation mask is empty");
  if (observation.values.size() != m) {
    throw DomainError("observation values do not match its mask");
  }
  if (!observation.values.allFinite()) {
    throw DomainError("observation contains non-finite values");
  }

  auto& x = ensemble.members;
  Eigen::MatrixXd hx(m, num_members);
  for (int j = 0; j < num_members; ++j) {
    hx.col(j) = ObserveMember(x.col(j), observation.channels, model);
  }
  Eigen::VectorXd r(m);
  for (int i = 0; i < m; ++i) r[i] = model.noise_variance[observation.channels[i]];

  const double norm = 1.0 / (num_members - 1);
  const Eigen::MatrixXd ha = hx.colwise() - hx.rowwise().mean();
  const Eigen::MatrixXd a = x.colwise() - x.rowwise().mean();

  Eigen::MatrixXd s = norm * ha * ha.transpose();
  s.diagonal() += r;
  s = 0.5 * (s + s.transpose()).eval();

  Eigen::LLT<Eigen::MatrixXd> llt(s);
  if (llt.info() != Eigen::Success) {
    const double jitter = 1e-9 * s.trace() / m;
    s.diagonal().array() += jitter;
    llt.compute(s);
    if (llt.info() != Eigen::Success || !(jitter > 0.0)) {
      throw NumericalError("innovation covariance is singular");
    }
  }

  // K = norm * A HA^T S^-1
  const Eigen::MatrixXd gain =
      norm * llt.solve(ha * a.transpose()).transpose();

  Eigen::MatrixXd innovation = (-hx).colwise() + observation.values;
  if (perturb) {
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int j = 0; j < num_members; ++j) {
      for (int i = 0; i < m; ++i) innovation(i, j) += std::sqrt(r[i]) * normal(rng);
    }
  }
  x += gain * innovation;
  ApplyPhaseMode(ensemble, model.phase_mode);
}

GaussianMoments Posterior(const Ensemble& ensemble) {
  return SampleMoments(ensemble.members);
}

TrajectoryPrediction PredictTrajectory(const Ensemble& ensemble,
                                       const IPModel& model, int channel,
                                       double lo, double hi, int resolution) {
  if (channel < 0 || channel >= model.num_channels()) {
    throw DomainError("unknown channel " + std::to_string(channel));
  }
  if (!(lo >= 0.0 && hi <= 1.0 && lo <= hi)) {
    throw DomainError("prediction phase range must satisfy 0 <= lo <= hi <= 1");
  }
  if (resolution < 1) throw DomainError("resolution must be positive");
  if (lo == hi) resolution = 1;

  TrajectoryPrediction out;
  out.phases.resize(resolution);
  for (int k = 0; k < resolution; ++k) {
    out.phases[k] =
        resolution == 1 ? lo : lo + (hi - lo) * k / (resolution - 1);
  }
  if (resolution > 1) out.phases[resolution - 1] = hi;

  const Eigen::MatrixXd design = model.basis.Design(out.phases, channel);
  const int offset = model.StateOffset(channel);
  const int size = model.basis.layout().block_size(channel);
  // resolution x E
  const Eigen::MatrixXd values =
      design * ensemble.members.middleRows(offset, size);
  out.mean = values.rowwise().mean();
  const Eigen::MatrixXd centered = values.colwise() - out.mean;
  const int num_members = ensemble.size();
  out.stddev = num_members > 1
                   ? (centered.rowwise().squaredNorm() / (num_members - 1))
                         .cwiseSqrt()
                         .eval()
                   : Eigen::VectorXd::Zero(resolution).eval();
  return out;
}

// ---------------------------------------------------------------------------

FilterSession::FilterSession(std::shared_ptr<const IPModel> model,
                             FilterOptions options, std::uint64_t seed)
    : model_(std::move(model)),
      options_(options),
      ensemble_(InitialEnsemble(*model_)),
      rng_(seed) {
  if (options_.rate_scale <= 0.0) options_.rate_scale = model_->sample_rate;
}

void FilterSession::Predict(double dt) {
  mpip::Predict(ensemble_, dt, model_->process_noise, options_.rate_scale,
                model_->phase_mode, rng_);
}

void FilterSession::Update(const Observation& observation) {
  mpip::Update(ensemble_, observation, *model_, rng_, options_.perturb);
}

Eigen::VectorXd FilterSession::mean_state() const {
  return ensemble_.members.rowwise().mean();
}

double FilterSession::phase_estimate() const {
  return ensemble_.members.row(kPhaseIndex).mean();
}

bool FilterSession::completed() const {
  return model_->phase_mode == PhaseMode::kClamp && phase_estimate() >= 1.0;
}

}  // namespace mpip
