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

#include "mpip/dataset.h"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "mpip/errors.h"

namespace mpip {
namespace {

std::vector<std::string_view> SplitFields(std::string_view line) {
  std::vector<std::string_view> fields;
  size_t start = 0;
  while (true) {
    const size_t comma = line.find(',', start);
    std::string_view field = line.substr(start, comma - start);
    while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) {
      field.remove_prefix(1);
    }
    while (!field.empty() && (field.back() == ' ' || field.back() == '\t' ||
                              field.back() == '\r')) {
      field.remove_suffix(1);
    }
    fields.push_back(field);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

}  // namespace

std::string_view ToString(Role role) {
  switch (role) {
    case Role::kObserved:
      return "observed";
    case Role::kLatent:
      return "latent";
    case Role::kControl:
      return "control";
  }
  return "unknown";
}

Role ParseRole(std::string_view tag) {
  if (tag == "observed") return Role::kObserved;
  if (tag == "latent") return Role::kLatent;
  if (tag == "control") return Role::kControl;
  throw FormatError("unknown role tag '" + std::string(tag) + "'");
}

int FindChannel(const Schema& schema, std::string_view name) {
  for (size_t d = 0; d < schema.size(); ++d) {
    if (schema[d].name == name) return static_cast<int>(d);
  }
  throw DomainError("unknown channel '" + std::string(name) + "'");
}

std::vector<int> ChannelsWithRole(const Schema& schema, Role role) {
  std::vector<int> out;
  for (size_t d = 0; d < schema.size(); ++d) {
    if (schema[d].role == role) out.push_back(static_cast<int>(d));
  }
  return out;
}

std::string FormatDouble(double value) {
  char buffer[64];
  auto [end, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, end);
}

Eigen::VectorXd LinearPhases(int length) {
  if (length < 2) throw DomainError("a demonstration needs at least 2 samples");
  Eigen::VectorXd phases(length);
  for (int t = 0; t < length; ++t) {
    phases[t] = static_cast<double>(t) / (length - 1);
  }
  phases[length - 1] = 1.0;
  return phases;
}

Demonstration MakeDemonstration(Schema channels, Eigen::MatrixXd samples,
                                double sample_rate) {
  if (channels.empty()) throw FormatError("demonstration has no channels");
  if (static_cast<Eigen::Index>(channels.size()) != samples.cols()) {
    throw FormatError("channel count does not match sample columns");
  }
  if (samples.rows() < 2) {
    throw FormatError("demonstration needs at least 2 samples");
  }
  if (!(sample_rate > 0.0)) throw FormatError("sample rate must be positive");
  if (ChannelsWithRole(channels, Role::kObserved).empty()) {
    throw FormatError("demonstration needs at least one observed channel");
  }
  for (size_t a = 0; a < channels.size(); ++a) {
    if (channels[a].name.empty()) throw FormatError("empty channel name");
    for (size_t b = a + 1; b < channels.size(); ++b) {
      if (channels[a].name == channels[b].name) {
        throw FormatError("duplicate channel '" + channels[a].name + "'");
      }
    }
  }
  for (Eigen::Index d = 0; d < samples.cols(); ++d) {
    for (Eigen::Index t = 0; t < samples.rows(); ++t) {
      if (!std::isfinite(samples(t, d))) {
        throw FormatError("non-finite sample in channel '" + channels[d].name +
                          "' at row " + std::to_string(t));
      }
    }
  }
  Demonstration demo;
  demo.phases = LinearPhases(static_cast<int>(samples.rows()));
  demo.channels = std::move(channels);
  demo.samples = std::move(samples);
  demo.sample_rate = sample_rate;
  return demo;
}

Demonstration ParseDemonstration(std::istream& in, double sample_rate,
                                 std::string_view source) {
  const std::string where(source);
  std::string line;
  if (!std::getline(in, line)) {
    throw FormatError(where + ": missing channel name header");
  }
  std::vector<std::string> names;
  for (const auto field : SplitFields(line)) names.emplace_back(field);
  if (!std::getline(in, line)) {
    throw FormatError(where + ": missing role tag header");
  }
  const auto tags = SplitFields(line);
  if (tags.size() != names.size()) {
    throw FormatError(where + ": " + std::to_string(names.size()) +
                      " channel names but " + std::to_string(tags.size()) +
                      " role tags");
  }
  Schema schema;
  for (size_t d = 0; d < names.size(); ++d) {
    if (tags[d].empty()) {
      throw FormatError(where + ": missing role tag for channel '" +
                        std::string(names[d]) + "'");
    }
    try {
      schema.push_back({std::string(names[d]), ParseRole(tags[d])});
    } catch (const FormatError& e) {
      throw FormatError(where + ": channel '" + std::string(names[d]) +
                        "': " + e.what());
    }
  }

  std::vector<double> values;
  int row = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    const auto fields = SplitFields(line);
    if (fields.size() != schema.size()) {
      throw FormatError(where + ": row " + std::to_string(row) + " has " +
                        std::to_string(fields.size()) + " fields, expected " +
                        std::to_string(schema.size()));
    }
    for (size_t d = 0; d < fields.size(); ++d) {
      double v = 0.0;
      const auto field = fields[d];
      auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
      if (ec != std::errc() || ptr != field.data() + field.size() ||
          !std::isfinite(v)) {
        throw FormatError(where + ": invalid sample '" + std::string(field) +
                          "' in channel '" + schema[d].name + "' at row " +
                          std::to_string(row));
      }
      values.push_back(v);
    }
    ++row;
  }
  Eigen::MatrixXd samples(row, static_cast<Eigen::Index>(schema.size()));
  for (int t = 0; t < row; ++t) {
    for (size_t d = 0; d < schema.size(); ++d) {
      samples(t, d) = values[t * schema.size() + d];
    }
  }
  try {
    return MakeDemonstration(std::move(schema), std::move(samples), sample_rate);
  } catch (const FormatError& e) {
    throw FormatError(where + ": " + e.what());
  }
}

Demonstration ReadDemonstration(const std::filesystem::path& path,
                                double sample_rate) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  return ParseDemonstration(in, sample_rate, path.string());
}

void WriteDemonstration(std::ostream& out, const Demonstration& demo) {
  for (int d = 0; d < demo.num_channels(); ++d) {
    out << (d ? "," : "") << demo.channels[d].name;
  }
  out << '\n';
  for (int d = 0; d < demo.num_channels(); ++d) {
    out << (d ? "," : "") << ToString(demo.channels[d].role);
  }
  out << '\n';
  for (int t = 0; t < demo.length(); ++t) {
    for (int d = 0; d < demo.num_channels(); ++d) {
      out << (d ? "," : "") << FormatDouble(demo.samples(t, d));
    }
    out << '\n';
  }
}

void WriteDemonstration(const std::filesystem::path& path,
                        const Demonstration& demo) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  WriteDemonstration(out, demo);
  if (!out) throw Error("write failed for " + path.string());
}

std::vector<Demonstration> SplitAtBoundaries(const Demonstration& recording,
                                             std::span<const int> starts) {
  std::vector<Demonstration> pieces;
  for (size_t i = 0; i < starts.size(); ++i) {
    const int begin = starts[i];
    const int end = i + 1 < starts.size() ? starts[i + 1] : recording.length();
    if (begin < 0 || end > recording.length() || end - begin < 2) {
      throw FormatError("invalid stride boundary at index " + std::to_string(i));
    }
    pieces.push_back(MakeDemonstration(
        recording.channels, recording.samples.middleRows(begin, end - begin),
        recording.sample_rate));
  }
  return pieces;
}

SessionManifest ReadManifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open manifest " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
    SessionManifest manifest;
    manifest.sample_rate = doc.at("sample_rate").get<double>();
    if (doc.contains("demonstrations")) {
      manifest.demonstrations =
          doc["demonstrations"].get<std::vector<std::string>>();
    }
    if (doc.contains("recording")) {
      manifest.recording = doc["recording"].get<std::string>();
      manifest.stride_boundaries =
          doc.at("stride_boundaries").get<std::vector<int>>();
    }
    if (doc.contains("metadata")) manifest.metadata_json = doc["metadata"].dump();
    if (manifest.demonstrations.empty() && manifest.recording.empty()) {
      throw FormatError("manifest lists no demonstrations");
    }
    return manifest;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("manifest " + path.string() + ": " + e.what());
  }
}

void WriteManifest(const std::filesystem::path& path,
                   const SessionManifest& manifest) {
  nlohmann::ordered_json doc;
  doc["format"] = "mpip-session";
  doc["version"] = 1;
  doc["sample_rate"] = manifest.sample_rate;
  if (!manifest.demonstrations.empty()) {
    doc["demonstrations"] = manifest.demonstrations;
  }
  if (!manifest.recording.empty()) {
    doc["recording"] = manifest.recording;
    doc["stride_boundaries"] = manifest.stride_boundaries;
  }
  doc["metadata"] = nlohmann::ordered_json::parse(manifest.metadata_json);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << doc.dump(2) << '\n';
  if (!out) throw Error("write failed for " + path.string());
}

std::vector<Demonstration> IngestSession(const std::filesystem::path& path) {
  const SessionManifest manifest = ReadManifest(path);
  const auto dir = path.parent_path();
  std::vector<Demonstration> demos;
  for (const auto& file : manifest.demonstrations) {
    demos.push_back(ReadDemonstration(dir / file, manifest.sample_rate));
  }
  if (!manifest.recording.empty()) {
    const Demonstration recording =
        ReadDemonstration(dir / manifest.recording, manifest.sample_rate);
    auto pieces = SplitAtBoundaries(recording, manifest.stride_boundaries);
    for (auto& piece : pieces) demos.push_back(std::move(piece));
  }
  return demos;
}

}  // namespace mpip
