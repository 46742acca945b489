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

#ifndef METRICFL_CLUSTERING_HPP_
#define METRICFL_CLUSTERING_HPP_

#include <algorithm>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "metricfl/parameter_vector.hpp"

namespace metricfl {

struct LabeledPoint {
  ClientId client = 0;
  ParameterVector value;
};

struct KMeansOptions {
  std::size_t max_iters = 100;
  double tol = 1e-9;
};

struct ClusterAssignment {
  // clusters[j]: client ids assigned to centroid j, in input order.
  std::vector<std::vector<ClientId>> clusters;
  std::vector<ParameterVector> centroids;
  // labels[i]: cluster of the i-th input point.
  std::vector<std::size_t> labels;
  std::size_t iterations = 0;
  // Within-cluster sum of squares after each assignment step.
  std::vector<double> inertia;
};

// Index of the nearest centroid; ties go to the lowest index.
inline std::size_t NearestCentroid(std::span<const double> point,
                                   const std::vector<ParameterVector>& centroids,
                                   double* squared_distance = nullptr) {
  std::size_t best = 0;
  double best_d = SquaredDistance(point, centroids[0].values());
  for (std::size_t j = 1; j < centroids.size(); ++j) {
    const double d = SquaredDistance(point, centroids[j].values());
    if (d < best_d) {
      best_d = d;
      best = j;
    }
  }
  if (squared_distance != nullptr) *squared_distance = best_d;
  return best;
}

// Lloyd's algorithm started exactly at `init_centroids`.
//
// Stops when an assignment step changes nothing, or after a centroid update
// that moves every centroid by less than `tol`, or after `max_iters`
// assignment steps. In the latter two cases one final assignment pass makes
// every label point at a nearest centroid. Empty clusters keep their previous
// centroid.
inline ClusterAssignment KMeansFromHypotheses(
    std::span<const LabeledPoint> points,
    const std::vector<ParameterVector>& init_centroids,
    const KMeansOptions& options = {}) {
  if (init_centroids.empty()) {
    throw std::invalid_argument("KMeansFromHypotheses: k must be >= 1");
  }
  const std::size_t n = init_centroids[0].dimension();
  for (const ParameterVector& c : init_centroids) {
    CheckDimension("KMeansFromHypotheses(centroid)", n, c.dimension());
  }
  for (const LabeledPoint& p : points) {
    CheckDimension("KMeansFromHypotheses(point)", n, p.value.dimension());
  }
  const std::size_t k = init_centroids.size();

  ClusterAssignment result;
  result.centroids = init_centroids;
  std::vector<std::size_t> labels(points.size(), 0);

  auto assign = [&]() {
    double inertia = 0.0;
    bool changed = false;
    for (std::size_t i = 0; i < points.size(); ++i) {
      double d = 0.0;
      const std::size_t j =
          NearestCentroid(points[i].value.values(), result.centroids, &d);
      inertia += d;
      if (j != labels[i]) changed = true;
      labels[i] = j;
    }
    return std::pair{changed, inertia};
  };

  bool converged = false;
  bool needs_final_pass = false;
  while (result.iterations < options.max_iters) {
    auto [changed, inertia] = assign();
    ++result.iterations;
    result.inertia.push_back(inertia);
    if (result.iterations > 1 && !changed) {
      converged = true;
      break;
    }

    std::vector<std::vector<double>> sums(k, std::vector<double>(n, 0.0));
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < points.size(); ++i) {
      ++counts[labels[i]];
      for (std::size_t d = 0; d < n; ++d) sums[labels[i]][d] += points[i].value[d];
    }
    double movement = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      if (counts[j] == 0) continue;
      for (double& s : sums[j]) s /= static_cast<double>(counts[j]);
      ParameterVector updated(std::move(sums[j]));
      movement = std::max(movement,
                          Distance(updated, result.centroids[j]));
      result.centroids[j] = std::move(updated);
    }
    if (movement < options.tol) {
      needs_final_pass = true;
      break;
    }
  }
  if (!converged && (needs_final_pass || result.iterations >= options.max_iters) &&
      !points.empty()) {
    assign();
  }

  result.labels = labels;
  result.clusters.assign(k, {});
  for (std::size_t i = 0; i < points.size(); ++i) {
    result.clusters[labels[i]].push_back(points[i].client);
  }
  return result;
}

inline double WithinClusterSumOfSquares(std::span<const LabeledPoint> points,
                                        const ClusterAssignment& assignment) {
  double sum = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    sum += SquaredDistance(points[i].value.values(),
                           assignment.centroids[assignment.labels[i]].values());
  }
  return sum;
}

}  // namespace metricfl

#endif  // METRICFL_CLUSTERING_HPP_
