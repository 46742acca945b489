// Copyright 2026 The metricfl Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef METRICFL_DIAGNOSTICS_HPP_
#define METRICFL_DIAGNOSTICS_HPP_

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

#include "metricfl/csv.hpp"
#include "metricfl/mechanism.hpp"
#include "metricfl/rng.hpp"

namespace metricfl {

struct MomentStatistic {
  std::string name;
  double empirical = 0.0;
  double theoretical = 0.0;

  double abs_error() const { return std::abs(empirical - theoretical); }
  double rel_error() const {
    return theoretical == 0.0 ? abs_error() : abs_error() / std::abs(theoretical);
  }
};

struct MechanismReport {
  std::size_t dimension = 0;
  double epsilon = 0.0;
  std::size_t samples = 0;
  std::vector<MomentStatistic> statistics;

  const MomentStatistic& Get(const std::string& name) const {
    for (const MomentStatistic& s : statistics) {
      if (s.name == name) return s;
    }
    throw std::out_of_range("MechanismReport: no statistic " + name);
  }
};

// Empirical moments of `samples` noise draws against their closed forms:
// radius mean n/eps, radius variance n/eps^2, component mean 0 and component
// variance (n+1)/eps^2 (pooled over components).
inline MechanismReport VerifyMechanism(std::size_t dimension, double epsilon,
                                       std::size_t samples, std::uint64_t seed) {
  if (samples < 2) throw std::invalid_argument("VerifyMechanism: need >= 2 samples");
  const NoiseScale scale(epsilon, dimension);
  Rng rng(seed, StreamRole::kDiagnostics, 0, 0);
  double r_sum = 0.0, r_sq = 0.0, c_sum = 0.0, c_sq = 0.0;
  for (std::size_t i = 0; i < samples; ++i) {
    const NoiseVector noise = SampleNoise(scale, rng);
    r_sum += noise.radius;
    r_sq += noise.radius * noise.radius;
    for (double x : noise.components) {
      c_sum += x;
      c_sq += x * x;
    }
  }
  const double m = static_cast<double>(samples);
  const double mc = m * static_cast<double>(dimension);
  const double r_mean = r_sum / m;
  const double c_mean = c_sum / mc;
  const double n = static_cast<double>(dimension);

  MechanismReport report{dimension, epsilon, samples, {}};
  report.statistics = {
      {"mean_radius", r_mean, n / epsilon},
      {"radius_variance", (r_sq - m * r_mean * r_mean) / (m - 1.0),
       n / (epsilon * epsilon)},
      {"component_mean", c_mean, 0.0},
      {"component_variance", (c_sq - mc * c_mean * c_mean) / (mc - 1.0),
       (n + 1.0) / (epsilon * epsilon)},
  };
  return report;
}

inline void WriteReportCsv(std::ostream& out, const MechanismReport& report) {
  out << "statistic,empirical,theoretical,abs_error\n";
  for (const MomentStatistic& s : report.statistics) {
    out << s.name << ',' << FormatDouble(s.empirical) << ','
        << FormatDouble(s.theoretical) << ',' << FormatDouble(s.abs_error()) << '\n';
  }
}

inline void WriteReportTable(std::ostream& out, const MechanismReport& report) {
  char line[160];
  std::snprintf(line, sizeof(line), "Euclidean Laplace: n=%zu epsilon=%g samples=%zu\n",
                report.dimension, report.epsilon, report.samples);
  out << line;
  std::snprintf(line, sizeof(line), "%-20s %14s %14s %12s %9s\n", "statistic",
                "empirical", "theoretical", "abs_error", "rel_err");
  out << line;
  for (const MomentStatistic& s : report.statistics) {
    std::snprintf(line, sizeof(line), "%-20s %14.6f %14.6f %12.6f %8.3f%%\n",
                  s.name.c_str(), s.empirical, s.theoretical, s.abs_error(),
                  s.theoretical == 0.0 ? 0.0 : 100.0 * s.rel_error());
    out << line;
  }
}

}  // namespace metricfl

#endif  // METRICFL_DIAGNOSTICS_HPP_
