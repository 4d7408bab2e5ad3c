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

#include "mpip/basis.h"

#include <cmath>
#include <numbers>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "mpip/errors.h"

namespace mpip {
namespace {

constexpr double kInvSqrtTwoPi = 0.5 * std::numbers::inv_sqrtpi * std::numbers::sqrt2;

void CheckPhase(double phase) {
  if (!(phase >= 0.0 && phase <= 1.0)) {
    throw DomainError("phase " + std::to_string(phase) + " outside [0, 1]");
  }
}

// erf(zb) - erf(za) for za <= zb. Uses erfc on tails where erf rounds to 1.
double ErfDifference(double za, double zb, double erf_a, double erf_b,
                     double erfc_abs_a, double erfc_abs_b) {
  if (za >= 0.0) return erfc_abs_a - erfc_abs_b;
  if (zb <= 0.0) return erfc_abs_b - erfc_abs_a;
  return erf_b - erf_a;
}

double GaussianScaledArgument(double phase, double center, double width) {
  return (phase - center) / (width * std::numbers::sqrt2);
}

}  // namespace

std::string_view ToString(BasisFamily family) {
  switch (family) {
    case BasisFamily::kGaussian:
      return "gaussian";
    case BasisFamily::kVonMises:
      return "von_mises";
    case BasisFamily::kPolynomial:
      return "polynomial";
  }
  return "unknown";
}

BasisFamily ParseBasisFamily(std::string_view name) {
  if (name == "gaussian") return BasisFamily::kGaussian;
  if (name == "von_mises") return BasisFamily::kVonMises;
  if (name == "polynomial") return BasisFamily::kPolynomial;
  throw ConfigError("unknown basis family '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------

WeightLayout::WeightLayout(std::vector<int> block_sizes)
    : sizes_(std::move(block_sizes)) {
  offsets_.reserve(sizes_.size());
  for (int size : sizes_) {
    if (size < 0) throw DomainError("negative weight block size");
    offsets_.push_back(total_);
    total_ += size;
  }
}

int WeightLayout::offset(int channel) const {
  if (channel < 0 || channel >= num_channels()) {
    throw DomainError("unknown channel " + std::to_string(channel));
  }
  return offsets_[channel];
}

int WeightLayout::block_size(int channel) const {
  if (channel < 0 || channel >= num_channels()) {
    throw DomainError("unknown channel " + std::to_string(channel));
  }
  return sizes_[channel];
}

// ---------------------------------------------------------------------------

BasisModel::BasisModel(BasisFamily family, double width,
                       std::vector<std::vector<double>> centers)
    : family_(family), width_(width), centers_(std::move(centers)) {
  if (family_ != BasisFamily::kPolynomial && !(width_ > 0.0)) {
    throw ConfigError("basis width must be positive");
  }
  std::vector<int> sizes;
  sizes.reserve(centers_.size());
  for (const auto& channel_centers : centers_) {
    if (channel_centers.size() < 2) {
      throw ConfigError("each channel needs at least two basis functions");
    }
    for (double c : channel_centers) {
      if (!(c >= 0.0 && c <= 1.0)) {
        throw ConfigError("basis center outside [0, 1]");
      }
    }
    sizes.push_back(static_cast<int>(channel_centers.size()));
  }
  layout_ = WeightLayout(std::move(sizes));
}

BasisModel BasisModel::Uniform(BasisFamily family, int num_channels,
                               int per_channel, double width) {
  if (per_channel < 2) {
    throw ConfigError("each channel needs at least two basis functions");
  }
  std::vector<double> centers(per_channel);
  for (int b = 0; b < per_channel; ++b) {
    centers[b] = static_cast<double>(b) / (per_channel - 1);
  }
  if (width <= 0.0) width = 1.0 / per_channel;
  return BasisModel(family, width,
                    std::vector<std::vector<double>>(num_channels, centers));
}

const std::vector<double>& BasisModel::centers(int channel) const {
  CheckChannel(channel);
  return centers_[channel];
}

void BasisModel::CheckChannel(int channel) const {
  if (channel < 0 || channel >= num_channels()) {
    throw DomainError("unknown channel " + std::to_string(channel));
  }
}

double BasisModel::Function(double phase, int channel, int index) const {
  const double center = centers_[channel][index];
  switch (family_) {
    case BasisFamily::kGaussian: {
      const double z = (phase - center) / (2.0 * width_);
      return kInvSqrtTwoPi / width_ * std::exp(-z * z);
    }
    case BasisFamily::kVonMises: {
      const double two_pi_sigma = 2.0 * std::numbers::pi * width_;
      const double kappa = 1.0 / (two_pi_sigma * two_pi_sigma);
      return kInvSqrtTwoPi / width_ *
             std::exp(kappa *
                      (std::cos(2.0 * std::numbers::pi * (phase - center)) - 1.0));
    }
    case BasisFamily::kPolynomial:
      return std::pow(phase, index);
  }
  return 0.0;
}

void BasisModel::EvaluateInto(double phase, int channel,
                              Eigen::Ref<Eigen::VectorXd> out) const {
  CheckChannel(channel);
  CheckPhase(phase);
  const int n = layout_.block_size(channel);
  if (out.size() != n) throw DomainError("feature buffer has wrong size");
  for (int b = 0; b < n; ++b) out[b] = Function(phase, channel, b);
}

Eigen::VectorXd BasisModel::Evaluate(double phase, int channel) const {
  CheckChannel(channel);
  Eigen::VectorXd out(layout_.block_size(channel));
  EvaluateInto(phase, channel, out);
  return out;
}

Eigen::MatrixXd BasisModel::Design(
    const Eigen::Ref<const Eigen::VectorXd>& phases, int channel) const {
  CheckChannel(channel);
  const int n = layout_.block_size(channel);
  Eigen::MatrixXd design(phases.size(), n);
  for (Eigen::Index t = 0; t < phases.size(); ++t) {
    CheckPhase(phases[t]);
    for (int b = 0; b < n; ++b) design(t, b) = Function(phases[t], channel, b);
  }
  return design;
}

// ---------------------------------------------------------------------------

Eigen::VectorXd FitWeights(const Eigen::Ref<const Eigen::VectorXd>& samples,
                           const Eigen::Ref<const Eigen::VectorXd>& phases,
                           const BasisModel& model, int channel, double ridge) {
  const int n = model.layout().block_size(channel);
  if (samples.size() != phases.size()) {
    throw DomainError("samples and phases differ in length");
  }
  if (samples.size() < n) {
    throw DomainError("trajectory shorter than the channel's basis count");
  }
  if (!(ridge >= 0.0)) throw DomainError("ridge must be nonnegative");
  for (Eigen::Index t = 1; t < phases.size(); ++t) {
    if (!(phases[t] > phases[t - 1])) {
      throw DomainError("phases must be strictly increasing");
    }
  }

  const Eigen::MatrixXd design = model.Design(phases, channel);
  if (ridge == 0.0) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    if (qr.rank() < n) {
      throw NumericalError(
          "rank-deficient basis design for channel " + std::to_string(channel) +
          "; set ridge > 0");
    }
    return qr.solve(samples);
  }

  // [Phi; sqrt(ridge) I] w = [y; 0]
  Eigen::MatrixXd augmented(design.rows() + n, n);
  augmented.topRows(design.rows()) = design;
  augmented.bottomRows(n) =
      std::sqrt(ridge) * Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(design.rows() + n);
  rhs.head(design.rows()) = samples;
  return augmented.householderQr().solve(rhs);
}

Eigen::VectorXd Reconstruct(const Eigen::Ref<const Eigen::VectorXd>& weights,
                            const Eigen::Ref<const Eigen::VectorXd>& phases,
                            const BasisModel& model, int channel) {
  if (weights.size() != model.layout().size()) {
    throw DomainError("weight vector does not match the basis layout");
  }
  const auto block = model.layout().Block(weights, channel);
  return model.Design(phases, channel) * block;
}

double SquaredBasisIntegral(double center, double width, double lo,
                            double hi) {
  if (!(width > 0.0)) throw DomainError("basis width must be positive");
  if (!(lo >= 0.0 && hi <= 1.0)) {
    throw DomainError("integration limits outside [0, 1]");
  }
  if (lo > hi) throw DomainError("integration limits reversed (lo > hi)");
  const double za = GaussianScaledArgument(lo, center, width);
  const double zb = GaussianScaledArgument(hi, center, width);
  const double diff =
      ErfDifference(za, zb, std::erf(za), std::erf(zb),
                    std::erfc(std::abs(za)), std::erfc(std::abs(zb)));
  return diff * 0.5 * kInvSqrtTwoPi / width;
}

namespace {

double NumericSquaredIntegral(const BasisModel& model, int channel, int index,
                              double lo, double hi) {
  if (lo == hi) return 0.0;
  auto integrand = [&](double phase) {
    const double v = model.Function(phase, channel, index);
    return v * v;
  };
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      integrand, lo, hi, 10, 1e-13);
}

}  // namespace

Eigen::VectorXd PrecomputePsi(const BasisModel& model, double lo, double hi,
                              int channel) {
  const auto& centers = model.centers(channel);
  if (!(lo >= 0.0 && hi <= 1.0)) {
    throw DomainError("integration limits outside [0, 1]");
  }
  if (lo > hi) throw DomainError("integration limits reversed (lo > hi)");
  Eigen::VectorXd psi(centers.size());
  for (size_t b = 0; b < centers.size(); ++b) {
    psi[b] = model.family() == BasisFamily::kGaussian
                 ? SquaredBasisIntegral(centers[b], model.width(), lo, hi)
                 : NumericSquaredIntegral(model, channel, b, lo, hi);
  }
  return psi;
}

// ---------------------------------------------------------------------------

PsiCache::PsiCache(const BasisModel& model, int channel, int grid_points)
    : family_(model.family()),
      width_(model.width()),
      centers_(model.centers(channel)),
      grid_points_(grid_points),
      model_(model),
      channel_(channel) {
  if (grid_points_ < 2) throw ConfigError("psi grid needs at least 2 points");
  if (family_ != BasisFamily::kGaussian) return;
  const int n = size();
  erf_.resize(grid_points_, n);
  erfc_abs_.resize(grid_points_, n);
  for (int k = 0; k < grid_points_; ++k) {
    const double g = static_cast<double>(k) / (grid_points_ - 1);
    for (int b = 0; b < n; ++b) {
      const double z = GaussianScaledArgument(g, centers_[b], width_);
      erf_(k, b) = std::erf(z);
      erfc_abs_(k, b) = std::erfc(std::abs(z));
    }
  }
}

int PsiCache::GridIndex(double phase) const {
  const double scaled = phase * (grid_points_ - 1);
  const double nearest = std::round(scaled);
  if (std::abs(scaled - nearest) > 1e-9) return -1;
  // the stored value must be bitwise the grid point that was queried
  const int k = static_cast<int>(nearest);
  if (static_cast<double>(k) / (grid_points_ - 1) != phase) return -1;
  return k;
}

void PsiCache::QueryInto(double lo, double hi,
                         Eigen::Ref<Eigen::VectorXd> out) const {
  if (out.size() != size()) throw DomainError("psi buffer has wrong size");
  if (!(lo >= 0.0 && hi <= 1.0)) {
    throw DomainError("integration limits outside [0, 1]");
  }
  if (lo > hi) throw DomainError("integration limits reversed (lo > hi)");
  if (family_ != BasisFamily::kGaussian) {
    out = PrecomputePsi(model_, lo, hi, channel_);
    return;
  }
  const int ka = GridIndex(lo);
  const int kb = GridIndex(hi);
  const double scale = 0.5 * kInvSqrtTwoPi / width_;
  for (int b = 0; b < size(); ++b) {
    const double za = GaussianScaledArgument(lo, centers_[b], width_);
    const double zb = GaussianScaledArgument(hi, centers_[b], width_);
    const double erf_a = ka >= 0 ? erf_(ka, b) : std::erf(za);
    const double erfc_a = ka >= 0 ? erfc_abs_(ka, b) : std::erfc(std::abs(za));
    const double erf_b = kb >= 0 ? erf_(kb, b) : std::erf(zb);
    const double erfc_b = kb >= 0 ? erfc_abs_(kb, b) : std::erfc(std::abs(zb));
    out[b] = ErfDifference(za, zb, erf_a, erf_b, erfc_a, erfc_b) * scale;
  }
}

Eigen::VectorXd PsiCache::Query(double lo, double hi) const {
  Eigen::VectorXd out(size());
  QueryInto(lo, hi, out);
  return out;
}

}  // namespace mpip
