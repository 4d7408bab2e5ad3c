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

#ifndef MPIP_BASIS_H_
#define MPIP_BASIS_H_

#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace mpip {

enum class BasisFamily { kGaussian, kVonMises, kPolynomial };

std::string_view ToString(BasisFamily family);
BasisFamily ParseBasisFamily(std::string_view name);

// Partition of the concatenated weight vector w = [w^0, ..., w^{D-1}] into
// per-channel blocks.
class WeightLayout {
 public:
  WeightLayout() = default;
  explicit WeightLayout(std::vector<int> block_sizes);

  int num_channels() const { return static_cast<int>(sizes_.size()); }
  int size() const { return total_; }
  int offset(int channel) const;
  int block_size(int channel) const;

  template <typename Derived>
  auto Block(Eigen::MatrixBase<Derived>& w, int channel) const {
    return w.segment(offset(channel), block_size(channel));
  }
  template <typename Derived>
  auto Block(const Eigen::MatrixBase<Derived>& w, int channel) const {
    return w.segment(offset(channel), block_size(channel));
  }

 private:
  std::vector<int> sizes_;
  std::vector<int> offsets_;
  int total_ = 0;
};

// Per-channel basis functions over phase in [0, 1]. All channels share the
// family and width; each channel has its own centers.
//
// Gaussian:   (1 / (sigma sqrt(2 pi))) exp(-((phase - mu) / (2 sigma))^2)
// VonMises:   same peak, periodic in phase with concentration 1/(2 pi sigma)^2
// Polynomial: phase^k for the k-th center of the channel (centers only mark
//             the degree ordering)
class BasisModel {
 public:
  BasisModel() = default;
  BasisModel(BasisFamily family, double width,
             std::vector<std::vector<double>> centers);

  // B centers uniform on [0, 1] for each channel; width <= 0 selects 1/B.
  static BasisModel Uniform(BasisFamily family, int num_channels,
                            int per_channel, double width = 0.0);

  BasisFamily family() const { return family_; }
  double width() const { return width_; }
  int num_channels() const { return layout_.num_channels(); }
  const std::vector<double>& centers(int channel) const;
  const WeightLayout& layout() const { return layout_; }

  Eigen::VectorXd Evaluate(double phase, int channel) const;
  void EvaluateInto(double phase, int channel,
                    Eigen::Ref<Eigen::VectorXd> out) const;

  // T x B^d matrix whose rows are the feature vectors at each phase.
  Eigen::MatrixXd Design(const Eigen::Ref<const Eigen::VectorXd>& phases,
                         int channel) const;

  // Value of the index-th basis function of a channel, no domain checks.
  double Function(double phase, int channel, int index) const;

 private:
  void CheckChannel(int channel) const;

  BasisFamily family_ = BasisFamily::kGaussian;
  double width_ = 0.0;
  std::vector<std::vector<double>> centers_;
  WeightLayout layout_;
};

// Ridge-regularized least squares fit of one channel's weight block.
// ridge == 0 on a rank-deficient design throws NumericalError.
Eigen::VectorXd FitWeights(const Eigen::Ref<const Eigen::VectorXd>& samples,
                           const Eigen::Ref<const Eigen::VectorXd>& phases,
                           const BasisModel& model, int channel, double ridge);

// Trajectory of one channel from the full concatenated weight vector.
Eigen::VectorXd Reconstruct(const Eigen::Ref<const Eigen::VectorXd>& weights,
                            const Eigen::Ref<const Eigen::VectorXd>& phases,
                            const BasisModel& model, int channel);

// Integral of the squared Gaussian basis function over [lo, hi], evaluated
// with the error-function antiderivative.
double SquaredBasisIntegral(double center, double width, double lo, double hi);

// Per-center squared integrals for one channel, computed directly.
Eigen::VectorXd PrecomputePsi(const BasisModel& model, double lo, double hi,
                              int channel);

// Memoized squared-basis integrals on a uniform phase grid. Queries whose
// endpoints fall on the grid reuse stored error-function values; others are
// evaluated exactly. Immutable after construction, so it can be shared
// between threads.
class PsiCache {
 public:
  PsiCache() = default;
  PsiCache(const BasisModel& model, int channel, int grid_points = 1001);

  int size() const { return static_cast<int>(centers_.size()); }
  int grid_points() const { return grid_points_; }

  Eigen::VectorXd Query(double lo, double hi) const;
  void QueryInto(double lo, double hi, Eigen::Ref<Eigen::VectorXd> out) const;

 private:
  int GridIndex(double phase) const;

  BasisFamily family_ = BasisFamily::kGaussian;
  double width_ = 0.0;
  std::vector<double> centers_;
  int grid_points_ = 0;
  // grid_points x B tables of erf(z) and erfc(|z|), z = (g - mu) / (sigma sqrt 2)
  Eigen::MatrixXd erf_;
  Eigen::MatrixXd erfc_abs_;
  // copy of the model for non-Gaussian families
  BasisModel model_;
  int channel_ = 0;
};

}  // namespace mpip

#endif  // MPIP_BASIS_H_
