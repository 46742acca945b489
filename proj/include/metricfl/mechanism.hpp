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

// Laplace mechanism under the Euclidean metric in R^n.
//
// The density centered at x0 is K * exp(-epsilon * ||x - x0||_2) with
//
//   K = epsilon^n * Gamma(n / 2) / (2 * pi^(n / 2) * Gamma(n)).
//
// The norm of a draw centered at the origin follows Gamma(shape n,
// scale 1 / epsilon), and its direction is uniform on the unit sphere, which
// gives the two-stage sampler below. Each component has variance
// (n + 1) / epsilon^2.

#ifndef METRICFL_MECHANISM_HPP_
#define METRICFL_MECHANISM_HPP_

#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "metricfl/parameter_vector.hpp"
#include "metricfl/rng.hpp"

namespace metricfl {

// Privacy parameter epsilon (inverse distance units) and dimension n.
class NoiseScale {
 public:
  NoiseScale(double epsilon, std::size_t dimension)
      : epsilon_(epsilon), dimension_(dimension) {
    if (!(epsilon > 0.0) || std::isnan(epsilon)) {
      throw std::invalid_argument("NoiseScale: epsilon must be > 0, got " +
                                  std::to_string(epsilon));
    }
    if (dimension == 0) {
      throw std::invalid_argument("NoiseScale: dimension must be >= 1");
    }
  }

  double epsilon() const { return epsilon_; }
  std::size_t dimension() const { return dimension_; }

 private:
  double epsilon_;
  std::size_t dimension_;
};

struct NoiseVector {
  std::vector<double> components;
  // Cached Euclidean norm of `components`.
  double radius = 0.0;
};

inline double LogNormalizationConstant(const NoiseScale& scale) {
  const double n = static_cast<double>(scale.dimension());
  return n * std::log(scale.epsilon()) + std::lgamma(0.5 * n) -
         std::numbers::ln2 - 0.5 * n * std::log(std::numbers::pi) -
         std::lgamma(n);
}

inline double NormalizationConstant(const NoiseScale& scale) {
  return std::exp(LogNormalizationConstant(scale));
}

inline double LogDensity(std::span<const double> point,
                         std::span<const double> center,
                         const NoiseScale& scale) {
  CheckDimension("LogDensity(point)", scale.dimension(), point.size());
  CheckDimension("LogDensity(center)", scale.dimension(), center.size());
  return LogNormalizationConstant(scale) -
         scale.epsilon() * Distance(point, center);
}

inline double Density(std::span<const double> point,
                      std::span<const double> center,
                      const NoiseScale& scale) {
  return std::exp(LogDensity(point, center, scale));
}

// One draw from Gamma(shape n, scale 1 / epsilon) as a sum of n independent
// exponentials with rate epsilon.
inline double SampleRadius(const NoiseScale& scale, Rng& rng) {
  double radius = 0.0;
  for (std::size_t i = 0; i < scale.dimension(); ++i) {
    radius += rng.Exponential(scale.epsilon());
  }
  return radius;
}

// Uniform point on the unit sphere in R^n (normalized standard normal).
inline std::vector<double> SampleDirection(std::size_t dimension, Rng& rng) {
  if (dimension == 0) {
    throw std::invalid_argument("SampleDirection: dimension must be >= 1");
  }
  std::vector<double> v(dimension);
  double norm = 0.0;
  do {
    double sum = 0.0;
    for (double& x : v) {
      x = rng.Normal();
      sum += x * x;
    }
    norm = std::sqrt(sum);
  } while (norm < 1e-300);
  for (double& x : v) x /= norm;
  return v;
}

inline NoiseVector SampleNoise(const NoiseScale& scale, Rng& rng) {
  NoiseVector noise;
  noise.radius = SampleRadius(scale, rng);
  noise.components = SampleDirection(scale.dimension(), rng);
  for (double& x : noise.components) x *= noise.radius;
  return noise;
}

// Returns `vector` plus Euclidean Laplace noise centered at the origin.
inline ParameterVector Sanitize(const ParameterVector& vector,
                                const NoiseScale& scale, Rng& rng) {
  CheckDimension("Sanitize", scale.dimension(), vector.dimension());
  ParameterVector out = vector;
  out += SampleNoise(scale, rng).components;
  return out;
}

}  // namespace metricfl

#endif  // METRICFL_MECHANISM_HPP_
