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

#ifndef MPIP_DATASET_H_
#define MPIP_DATASET_H_

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace mpip {

// How a channel is used at runtime: observed channels are measured, latent
// channels are only ever predicted, control channels are generated.
enum class Role { kObserved, kLatent, kControl };

std::string_view ToString(Role role);
Role ParseRole(std::string_view tag);

struct ChannelSpec {
  std::string name;
  Role role = Role::kObserved;

  bool operator==(const ChannelSpec&) const = default;
};

using Schema = std::vector<ChannelSpec>;

int FindChannel(const Schema& schema, std::string_view name);
std::vector<int> ChannelsWithRole(const Schema& schema, Role role);

// One recorded action instance (a stride, a jump). Phases are assigned
// linearly in time: phase(t) = t / (T - 1).
struct Demonstration {
  Schema channels;
  Eigen::MatrixXd samples;  // T x D
  double sample_rate = 100.0;
  Eigen::VectorXd phases;

  int length() const { return static_cast<int>(samples.rows()); }
  int num_channels() const { return static_cast<int>(samples.cols()); }
};

Eigen::VectorXd LinearPhases(int length);

// Validates shape and values and assigns phases. Throws FormatError naming
// the offending channel and row.
Demonstration MakeDemonstration(Schema channels, Eigen::MatrixXd samples,
                                double sample_rate);

// Tabular text: first line channel names, second line role tags
// (observed|latent|control), then one comma-separated row per sample.
Demonstration ParseDemonstration(std::istream& in, double sample_rate,
                                 std::string_view source = "<stream>");
Demonstration ReadDemonstration(const std::filesystem::path& path,
                                double sample_rate);
void WriteDemonstration(std::ostream& out, const Demonstration& demo);
void WriteDemonstration(const std::filesystem::path& path,
                        const Demonstration& demo);

// Cuts a continuous recording at stride start indices. Piece i spans samples
// [starts[i], starts[i + 1]) (the last one runs to the end) and is
// re-normalized to phase [0, 1].
std::vector<Demonstration> SplitAtBoundaries(const Demonstration& recording,
                                             std::span<const int> starts);

// Session manifest: structured text (JSON) listing demonstration files
// relative to the manifest, or a single recording plus stride boundaries.
struct SessionManifest {
  double sample_rate = 100.0;
  std::vector<std::string> demonstrations;
  std::string recording;
  std::vector<int> stride_boundaries;
  std::string metadata_json = "{}";  // free-form, carried through verbatim
};

SessionManifest ReadManifest(const std::filesystem::path& path);
void WriteManifest(const std::filesystem::path& path,
                   const SessionManifest& manifest);

// Loads every demonstration a manifest refers to.
std::vector<Demonstration> IngestSession(const std::filesystem::path& path);

// Shortest round-trip decimal representation.
std::string FormatDouble(double value);

}  // namespace mpip

#endif  // MPIP_DATASET_H_
