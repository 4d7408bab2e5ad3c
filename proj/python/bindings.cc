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


// Python bindings for the core library. Configs cross the boundary as JSON
// strings so the Python side can build them from plain dicts.

#include <memory>
#include <string>
#include <vector>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <nlohmann/json.hpp>

#include "mpip/basis.h"
#include "mpip/config.h"
#include "mpip/dataset.h"
#include "mpip/errors.h"
#include "mpip/filter.h"
#include "mpip/metrics.h"
#include "mpip/model.h"
#include "mpip/mpc.h"
#include "mpip/synth.h"

namespace py = pybind11;

namespace mpip {
namespace {

nlohmann::json ParseConfig(const std::string& text) {
  try {
    return text.empty() ? nlohmann::json::object() : nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("invalid config JSON: ") + e.what());
  }
}

std::vector<std::string> ChannelNames(const Schema& schema) {
  std::vector<std::string> names;
  for (const auto& c : schema) names.push_back(c.name);
  return names;
}

std::vector<std::string> ChannelRoles(const Schema& schema) {
  std::vector<std::string> roles;
  for (const auto& c : schema) roles.emplace_back(ToString(c.role));
  return roles;
}

std::shared_ptr<const IPModel> Share(const IPModel& model) {
  return std::make_shared<const IPModel>(model);
}

}  // namespace
}  // namespace mpip

PYBIND11_MODULE(_mpip, m) {
  using namespace mpip;
  m.doc() = "Interaction primitives with model predictive control";

  auto error = py::register_exception<Error>(m, "Error");
  py::register_exception<DomainError>(m, "DomainError", error.ptr());
  py::register_exception<FormatError>(m, "FormatError", error.ptr());
  py::register_exception<NumericalError>(m, "NumericalError", error.ptr());
  py::register_exception<ConfigError>(m, "ConfigError", error.ptr());

  py::class_<BasisModel>(m, "BasisModel")
      .def_static(
          "uniform",
          [](const std::string& family, int channels, int per_channel, double width) {
            return BasisModel::Uniform(ParseBasisFamily(family), channels, per_channel,
                                       width);
          },
          py::arg("family") = "gaussian", py::arg("channels") = 1,
          py::arg("per_channel") = 15, py::arg("width") = 0.0)
      .def_property_readonly("width", &BasisModel::width)
      .def_property_readonly("num_channels", &BasisModel::num_channels)
      .def("centers", &BasisModel::centers, py::arg("channel") = 0)
      .def("evaluate", &BasisModel::Evaluate, py::arg("phase"), py::arg("channel") = 0)
      .def("design", &BasisModel::Design, py::arg("phases"), py::arg("channel") = 0);

  m.def("fit_weights", &FitWeights, py::arg("samples"), py::arg("phases"), py::arg("basis"),
        py::arg("channel") = 0, py::arg("ridge") = 1e-6);
  m.def("reconstruct", &Reconstruct, py::arg("weights"), py::arg("phases"), py::arg("basis"),
        py::arg("channel") = 0);
  m.def("squared_basis_integral", &SquaredBasisIntegral, py::arg("center"), py::arg("width"),
        py::arg("lo"), py::arg("hi"));
  m.def("linear_phases", &LinearPhases, py::arg("length"));

  py::class_<Demonstration>(m, "Demonstration")
      .def_property_readonly("names", [](const Demonstration& d) { return ChannelNames(d.channels); })
      .def_property_readonly("roles", [](const Demonstration& d) { return ChannelRoles(d.channels); })
      .def_readonly("samples", &Demonstration::samples)
      .def_readonly("phases", &Demonstration::phases)
      .def_readonly("sample_rate", &Demonstration::sample_rate)
      .def("__len__", &Demonstration::length);

  m.def(
      "generate_demonstration",
      [](std::uint64_t seed, const std::string& world) {
        return GenerateDemonstration(WorldConfigFromJson(ParseConfig(world)), seed);
      },
      py::arg("seed"), py::arg("world") = "");
  m.def(
      "generate_session",
      [](int strides, std::uint64_t seed, const std::string& world) {
        return GenerateSession(WorldConfigFromJson(ParseConfig(world)), strides, seed).demos;
      },
      py::arg("strides"), py::arg("seed"), py::arg("world") = "");
  m.def("read_session", &IngestSession, py::arg("manifest"));

  py::class_<IPModel>(m, "Model")
      .def_property_readonly("names", [](const IPModel& m) { return ChannelNames(m.channels); })
      .def_property_readonly("roles", [](const IPModel& m) { return ChannelRoles(m.channels); })
      .def_property_readonly("ensemble_size", &IPModel::ensemble_size)
      .def_property_readonly("state_size", &IPModel::state_size)
      .def_readonly("ensemble", &IPModel::ensemble0)
      .def_readonly("weight_min", &IPModel::weight_min)
      .def_readonly("weight_max", &IPModel::weight_max)
      .def_readonly("noise_variance", &IPModel::noise_variance)
      .def_readonly("basis", &IPModel::basis)
      .def("channel_index", &IPModel::ChannelIndex)
      .def("to_json", &SerializeModel)
      .def("save", [](const IPModel& m, const std::filesystem::path& p) { SaveModel(p, m); })
      .def_static("from_json", [](const std::string& text) { return DeserializeModel(text); })
      .def_static("load", &LoadModel);

  m.def(
      "train",
      [](const std::vector<Demonstration>& demos, const std::string& config) {
        return Train(demos, TrainConfigFromJson(ParseConfig(config)));
      },
      py::arg("demos"), py::arg("config") = "");

  py::class_<StepResult>(m, "StepResult")
      .def_readonly("control", &StepResult::control)
      .def_property_readonly("cost_achieved",
                             [](const StepResult& r) { return r.plan.cost_achieved; })
      .def_property_readonly("cost_reactive",
                             [](const StepResult& r) { return r.plan.cost_reactive; })
      .def_property_readonly("phase", [](const StepResult& r) { return r.diagnostics.phase; })
      .def_property_readonly("fallback", [](const StepResult& r) { return r.plan.fallback; });

  py::class_<MpcSession>(m, "ControlSession")
      .def(py::init([](const IPModel& model, const std::string& objective,
                       const std::string& target, double horizon_x, double horizon_u,
                       double rho, std::uint64_t seed) {
             CostConfig cost;
             cost.objective = ParseObjective(objective);
             cost.target_channel = model.ChannelIndex(target);
             cost.horizon_x = horizon_x;
             cost.horizon_u = horizon_u;
             cost.rho = rho;
             return std::make_unique<MpcSession>(Share(model), cost, MpcOptions{},
                                                 FilterOptions{}, seed);
           }),
           py::arg("model"), py::arg("objective") = "minimize",
           py::arg("target") = "knee_force", py::arg("horizon_x") = 0.25,
           py::arg("horizon_u") = 0.10, py::arg("rho") = 1.0, py::arg("seed") = 0)
      .def(
          "step",
          [](MpcSession& s, const std::vector<int>& channels, const Eigen::VectorXd& values,
             double dt) {
            Observation obs;
            obs.channels = channels;
            obs.values = values;
            return s.Step(obs, dt);
          },
          py::arg("channels"), py::arg("values"), py::arg("dt"))
      .def_property_readonly("phase",
                             [](const MpcSession& s) { return s.filter().phase_estimate(); });

  m.def(
      "impulse", [](const std::vector<double>& s, double dt) { return Impulse(s, dt); },
      py::arg("signal"), py::arg("dt"));
  m.def(
      "peak", [](const std::vector<double>& s) { return Peak(s); }, py::arg("signal"));
  m.def(
      "lyapunov_exponent",
      [](const std::vector<double>& s, int embed_dim, int delay, int fit_window, int theiler,
         double dt) {
        LyapunovOptions o;
        o.embed_dim = embed_dim;
        o.delay = delay;
        o.fit_window = fit_window;
        o.theiler_window = theiler;
        o.dt = dt;
        return LyapunovExponent(s, o);
      },
      py::arg("series"), py::arg("embed_dim") = 5, py::arg("delay") = 10,
      py::arg("fit_window") = 60, py::arg("theiler_window") = -1, py::arg("dt") = 1.0);
}
