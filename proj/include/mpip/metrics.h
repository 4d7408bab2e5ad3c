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

#ifndef MPIP_METRICS_H_
#define MPIP_METRICS_H_

#include <limits>
#include <map>
#include <span>
#include <string>

namespace mpip {

// Trapezoidal integral of a uniformly sampled signal.
double Impulse(std::span<const double> signal, double dt);

double Peak(std::span<const double> signal);

double ValueAtEvent(std::span<const double> signal, int index);

// Samples per cycle estimated from mean crossings; 0 when the signal never
// crosses its mean.
double MeanPeriod(std::span<const double> signal);

struct LyapunovOptions {
  int embed_dim = 5;
  int delay = 10;
  int fit_window = 60;      // divergence steps used for the slope fit
  int theiler_window = -1;  // < 0: one mean period
  double dt = 1.0;          // time per sample; the slope is per unit time
};

// Largest short-term Lyapunov exponent (Rosenstein): delay embedding,
// nearest neighbours outside the temporal exclusion window, mean log
// divergence over time, least-squares slope over the fit window.
double LyapunovExponent(std::span<const double> series,
                        const LyapunovOptions& options = {});

struct TrialMetrics {
  std::string trial_id;
  std::string mode;
  std::map<std::string, double> impulse;
  std::map<std::string, double> peak;
  std::map<std::string, double> value_at_event;
  double stability_exponent = std::numeric_limits<double>::quiet_NaN();
};

struct MeanStd {
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation, 0 for a single value
  int count = 0;
};

// Order independent: values are sorted before summation, so permuted inputs
// give bitwise identical results.
MeanStd Summarize(std::span<const double> values);

}  // namespace mpip

#endif  // MPIP_METRICS_H_
