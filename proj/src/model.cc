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

#include "mpip/model.h"

#include <algorithm>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "mpip/errors.h"

namespace mpip {

std::string_view ToString(PhaseMode mode) {
  return mode == PhaseMode::kClamp ? "clamp" : "wrap";
}

PhaseMode ParsePhaseMode(std::string_view name) {
  if (name == "clamp") return PhaseMode::kClamp;
  if (name == "wrap") return PhaseMode::kWrap;
  throw ConfigError("unknown phase mode '" + std::string(name) + "'");
}

int IPModel::ControlChannel() const {
  const auto controls = ChannelsWithRole(channels, Role::kControl);
  if (controls.empty()) throw DomainError("model has no control channel");
  return controls.front();
}

Eigen::VectorXd EncodeDemonstration(const Demonstration& demo,
                                    const BasisModel& basis, double ridge) {
  const auto& layout = basis.layout();
  if (layout.num_channels() != demo.num_channels()) {
    throw DomainError("basis and demonstration channel counts differ");
  }
  Eigen::VectorXd w(layout.size());
  for (int d = 0; d < demo.num_channels(); ++d) {
    layout.Block(w, d) =
        FitWeights(demo.samples.col(d), demo.phases, basis, d, ridge);
  }
  return w;
}

IPModel Train(std::span<const Demonstration> demos, const TrainConfig& config) {
  if (demos.size() < 2) {
    throw ConfigError("training needs at least 2 demonstrations, got " +
                      std::to_string(demos.size()));
  }
  const Schema& schema = demos.front().channels;
  for (size_t n = 1; n < demos.size(); ++n) {
    if (demos[n].channels != schema) {
      throw FormatError("demonstration " + std::to_string(n) +
                        " has a different channel schema");
    }
    if (demos[n].sample_rate != demos.front().sample_rate) {
      throw FormatError("demonstration " + std::to_string(n) +
                        " has a different sample rate");
    }
  }
  const int num_controls =
      static_cast<int>(ChannelsWithRole(schema, Role::kControl).size());
  if (num_controls != config.control_channels) {
    throw FormatError("expected " + std::to_string(config.control_channels) +
                      " control channel(s), found " +
                      std::to_string(num_controls));
  }
  if (config.ensemble_size == 1 || config.ensemble_size < 0) {
    throw ConfigError("ensemble size must be 0 (all) or at least 2");
  }

  IPModel model;
  model.channels = schema;
  model.basis = BasisModel::Uniform(config.family,
                                    static_cast<int>(schema.size()),
                                    config.basis_per_channel, config.width);
  model.sample_rate = demos.front().sample_rate;
  model.ridge = config.ridge;
  model.phase_mode = config.phase_mode;
  model.process_noise = config.process_noise;

  const int num_demos = static_cast<int>(demos.size());
  const int num_weights = model.basis.layout().size();
  const int num_channels = static_cast<int>(schema.size());

  Eigen::MatrixXd members(kWeightOffset + num_weights, num_demos);
  double total_steps = 0.0;
  Eigen::VectorXd residual_sum = Eigen::VectorXd::Zero(num_channels);
  Eigen::VectorXd channel_min =
      Eigen::VectorXd::Constant(num_channels, std::numeric_limits<double>::infinity());
  Eigen::VectorXd channel_max = -channel_min;
  double sample_count = 0.0;

  for (int n = 0; n < num_demos; ++n) {
    const Demonstration& demo = demos[n];
    const Eigen::VectorXd w = EncodeDemonstration(demo, model.basis, config.ridge);
    members(kPhaseIndex, n) = 0.0;
    members(kVelocityIndex, n) = 1.0 / (demo.length() - 1);
    members.col(n).tail(num_weights) = w;
    total_steps += demo.length() - 1;

    for (int d = 0; d < num_channels; ++d) {
      if (schema[d].role != Role::kObserved) continue;
      const Eigen::VectorXd fit =
          Reconstruct(w, demo.phases, model.basis, d);
      residual_sum[d] += (demo.samples.col(d) - fit).squaredNorm();
      channel_min[d] = std::min(channel_min[d], demo.samples.col(d).minCoeff());
      channel_max[d] = std::max(channel_max[d], demo.samples.col(d).maxCoeff());
    }
    sample_count += demo.length();
  }

  model.mean_phase_velocity = num_demos / total_steps;
  model.weight_min = members.bottomRows(num_weights).rowwise().minCoeff();
  model.weight_max = members.bottomRows(num_weights).rowwise().maxCoeff();

  model.noise_variance = Eigen::VectorXd::Zero(num_channels);
  for (int d = 0; d < num_channels; ++d) {
    if (schema[d].role != Role::kObserved) continue;
    const double range = channel_max[d] - channel_min[d];
    const double floor = std::max(config.noise_floor * range * range, 1e-12);
    model.noise_variance[d] = std::max(residual_sum[d] / sample_count, floor);
  }

  if (config.ensemble_size == 0 || config.ensemble_size >= num_demos) {
    model.ensemble0 = std::move(members);
  } else {
    std::vector<int> order(num_demos);
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(config.seed);
    for (int i = 0; i < config.ensemble_size; ++i) {
      std::uniform_int_distribution<int> pick(i, num_demos - 1);
      std::swap(order[i], order[pick(rng)]);
    }
    order.resize(config.ensemble_size);
    std::sort(order.begin(), order.end());
    model.ensemble0.resize(members.rows(), config.ensemble_size);
    for (int j = 0; j < config.ensemble_size; ++j) {
      model.ensemble0.col(j) = members.col(order[j]);
    }
  }
  return model;
}

GaussianMoments SampleMoments(const Eigen::Ref<const Eigen::MatrixXd>& members) {
  const Eigen::Index count = members.cols();
  if (count < 2) throw DomainError("sample moments need at least 2 members");
  GaussianMoments moments;
  // shift by the first member: exact for identical members, less cancellation
  const Eigen::VectorXd anchor = members.col(0);
  const Eigen::MatrixXd shifted = members.colwise() - anchor;
  const Eigen::VectorXd offset = shifted.rowwise().mean();
  moments.mean = anchor + offset;
  const Eigen::MatrixXd centered = shifted.colwise() - offset;
  moments.covariance = centered * centered.transpose() / double(count - 1);
  return moments;
}

GaussianMoments PriorStatistics(const IPModel& model) {
  return SampleMoments(model.ensemble0);
}

// ---------------------------------------------------------------------------
// persistence

namespace {

using Json = nlohmann::ordered_json;

Json VectorToJson(const Eigen::VectorXd& v) {
  return Json(std::vector<double>(v.data(), v.data() + v.size()));
}

Eigen::VectorXd VectorFromJson(const Json& j) {
  const auto values = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(values.data(), values.size());
}

}  // namespace

std::string SerializeModel(const IPModel& model) {
  Json doc;
  doc["format"] = "mpip-model";
  doc["version"] = 1;
  Json channels = Json::array();
  for (const auto& c : model.channels) {
    channels.push_back({{"name", c.name}, {"role", ToString(c.role)}});
  }
  doc["channels"] = channels;
  Json centers = Json::array();
  for (int d = 0; d < model.basis.num_channels(); ++d) {
    centers.push_back(model.basis.centers(d));
  }
  doc["basis"] = {{"family", ToString(model.basis.family())},
                  {"width", model.basis.width()},
                  {"centers", centers}};
  doc["sample_rate"] = model.sample_rate;
  doc["ridge"] = model.ridge;
  doc["phase_mode"] = ToString(model.phase_mode);
  doc["process_noise"] = {{"phase_std", model.process_noise.phase_std},
                          {"velocity_std", model.process_noise.velocity_std},
                          {"weight_std", model.process_noise.weight_std}};
  doc["mean_phase_velocity"] = model.mean_phase_velocity;
  doc["noise_variance"] = VectorToJson(model.noise_variance);
  doc["weight_bounds"] = {{"min", VectorToJson(model.weight_min)},
                          {"max", VectorToJson(model.weight_max)}};
  Json ensemble = Json::array();
  for (int j = 0; j < model.ensemble_size(); ++j) {
    ensemble.push_back(VectorToJson(model.ensemble0.col(j)));
  }
  doc["ensemble"] = ensemble;
  return doc.dump(1) + "\n";
}

IPModel DeserializeModel(std::string_view text) {
  try {
    const Json doc = Json::parse(text);
    if (doc.at("format").get<std::string>() != "mpip-model") {
      throw FormatError("not an mpip model document");
    }
    IPModel model;
    for (const auto& c : doc.at("channels")) {
      model.channels.push_back({c.at("name").get<std::string>(),
                                ParseRole(c.at("role").get<std::string>())});
    }
    const auto& basis = doc.at("basis");
    model.basis = BasisModel(
        ParseBasisFamily(basis.at("family").get<std::string>()),
        basis.at("width").get<double>(),
        basis.at("centers").get<std::vector<std::vector<double>>>());
    model.sample_rate = doc.at("sample_rate").get<double>();
    model.ridge = doc.at("ridge").get<double>();
    model.phase_mode = ParsePhaseMode(doc.at("phase_mode").get<std::string>());
    const auto& noise = doc.at("process_noise");
    model.process_noise.phase_std = noise.at("phase_std").get<double>();
    model.process_noise.velocity_std = noise.at("velocity_std").get<double>();
    model.process_noise.weight_std = noise.at("weight_std").get<double>();
    model.mean_phase_velocity = doc.at("mean_phase_velocity").get<double>();
    model.noise_variance = VectorFromJson(doc.at("noise_variance"));
    model.weight_min = VectorFromJson(doc.at("weight_bounds").at("min"));
    model.weight_max = VectorFromJson(doc.at("weight_bounds").at("max"));
    const auto& ensemble = doc.at("ensemble");
    const int state = model.state_size();
    model.ensemble0.resize(state, static_cast<Eigen::Index>(ensemble.size()));
    for (size_t j = 0; j < ensemble.size(); ++j) {
      const Eigen::VectorXd member = VectorFromJson(ensemble[j]);
      if (member.size() != state) {
        throw FormatError("ensemble member has wrong length");
      }
      model.ensemble0.col(j) = member;
    }

    const int num_weights = model.basis.layout().size();
    if (model.basis.num_channels() != model.num_channels() ||
        model.weight_min.size() != num_weights ||
        model.weight_max.size() != num_weights ||
        model.noise_variance.size() != model.num_channels()) {
      throw FormatError("model document has inconsistent dimensions");
    }
    if (model.ensemble_size() < 2) {
      throw FormatError("model ensemble needs at least 2 members");
    }
    if ((model.weight_min.array() > model.weight_max.array()).any()) {
      throw FormatError("weight bounds are not ordered");
    }
    for (int d = 0; d < model.num_channels(); ++d) {
      if (model.channels[d].role == Role::kObserved &&
          !(model.noise_variance[d] > 0.0)) {
        throw FormatError("observation noise must be positive for channel '" +
                          model.channels[d].name + "'");
      }
    }
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("model document: ") + e.what());
  } catch (const ConfigError& e) {
    throw FormatError(std::string("model document: ") + e.what());
  }
}

void SaveModel(const std::filesystem::path& path, const IPModel& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << SerializeModel(model);
  if (!out) throw Error("write failed for " + path.string());
}

IPModel LoadModel(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open model " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return DeserializeModel(buffer.str());
}

}  // namespace mpip
