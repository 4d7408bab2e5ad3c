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

#include "mpip/metrics.h"

#include <algorithm>
#include <cmath>
#include <vector>

#include "mpip/errors.h"

namespace mpip {

double Impulse(std::span<const double> signal, double dt) {
  if (signal.size() < 2) throw DomainError("impulse needs at least 2 samples");
  if (!(dt > 0.0)) throw DomainError("impulse needs dt > 0");
  double sum = 0.5 * (signal.front() + signal.back());
  for (size_t t = 1; t + 1 < signal.size(); ++t) sum += signal[t];
  return sum * dt;
}

double Peak(std::span<const double> signal) {
  if (signal.empty()) throw DomainError("peak of an empty signal");
  return *std::max_element(signal.begin(), signal.end());
}

double ValueAtEvent(std::span<const double> signal, int index) {
  if (index < 0 || static_cast<size_t>(index) >= signal.size()) {
    throw DomainError("event index outside the signal");
  }
  return signal[index];
}

double MeanPeriod(std::span<const double> signal) {
  if (signal.size() < 2) return 0.0;
  double mean = 0.0;
  for (double v : signal) mean += v;
  mean /= signal.size();
  int crossings = 0;
  for (size_t t = 1; t < signal.size(); ++t) {
    if ((signal[t - 1] - mean < 0.0) != (signal[t] - mean < 0.0)) ++crossings;
  }
  if (crossings == 0) return 0.0;
  return 2.0 * signal.size() / crossings;
}

double LyapunovExponent(std::span<const double> series,
                        const LyapunovOptions& options) {
  const int m = options.embed_dim;
  const int tau = options.delay;
  const int window = options.fit_window;
  if (m < 1 || tau < 1 || window < 1) {
    throw DomainError("embedding and fit parameters must be positive");
  }
  const int n = static_cast<int>(series.size());
  if (n <= m * tau + window) {
    throw DomainError("series too short for the delay embedding and fit window");
  }
  const int points = n - (m - 1) * tau;
  const int theiler = options.theiler_window >= 0
                          ? options.theiler_window
                          : static_cast<int>(std::ceil(MeanPeriod(series)));

  auto distance2 = [&](int a, int b) {
    double d = 0.0;
    for (int k = 0; k < m; ++k) {
      const double diff = series[a + k * tau] - series[b + k * tau];
      d += diff * diff;
    }
    return d;
  };

  // only reference points that can be followed for the whole window
  const int usable = points - window;
  std::vector<double> log_sum(window + 1, 0.0);
  std::vector<int> log_count(window + 1, 0);
  for (int i = 0; i < usable; ++i) {
    int best = -1;
    double best_d = std::numeric_limits<double>::infinity();
    for (int j = 0; j < usable; ++j) {
      if (std::abs(i - j) <= theiler) continue;
      const double d = distance2(i, j);
      if (d > 0.0 && d < best_d) {
        best_d = d;
        best = j;
      }
    }
    if (best < 0) continue;
    for (int k = 0; k <= window; ++k) {
      const double d = distance2(i + k, best + k);
      if (d > 0.0) {
        log_sum[k] += 0.5 * std::log(d);
        ++log_count[k];
      }
    }
  }

  // least-squares slope of mean log divergence against time
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  int count = 0;
  for (int k = 0; k <= window; ++k) {
    if (log_count[k] == 0) continue;
    const double x = k * options.dt;
    const double y = log_sum[k] / log_count[k];
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++count;
  }
  if (count < 2) throw NumericalError("no nearest-neighbour pairs to follow");
  const double denom = count * sxx - sx * sx;
  return (count * sxy - sx * sy) / denom;
}

MeanStd Summarize(std::span<const double> values) {
  MeanStd out;
  out.count = static_cast<int>(values.size());
  if (values.empty()) return out;
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  double sum = 0.0;
  for (double v : sorted) sum += v;
  out.mean = sum / sorted.size();
  if (sorted.size() > 1) {
    double ss = 0.0;
    for (double v : sorted) ss += (v - out.mean) * (v - out.mean);
    out.stddev = std::sqrt(ss / (sorted.size() - 1));
  }
  return out;
}

}  // namespace mpip
