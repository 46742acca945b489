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

#ifndef METRICFL_PARAMETER_VECTOR_HPP_
#define METRICFL_PARAMETER_VECTOR_HPP_

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace metricfl {

using ClientId = std::uint64_t;

class DimensionMismatch : public std::invalid_argument {
 public:
  DimensionMismatch(const std::string& where, std::size_t expected,
                    std::size_t actual)
      : std::invalid_argument(where + ": expected dimension " +
                              std::to_string(expected) + ", got " +
                              std::to_string(actual)) {}
};

inline void CheckDimension(const char* where, std::size_t expected,
                           std::size_t actual) {
  if (expected != actual) throw DimensionMismatch(where, expected, actual);
}

// A point in R^n: the unit of communication, sanitization and clustering.
// All entries are finite.
class ParameterVector {
 public:
  ParameterVector() = default;
  explicit ParameterVector(std::size_t dimension) : values_(dimension, 0.0) {}
  explicit ParameterVector(std::vector<double> values)
      : values_(std::move(values)) {
    CheckFinite();
  }
  ParameterVector(std::initializer_list<double> values) : values_(values) {
    CheckFinite();
  }

  std::size_t dimension() const { return values_.size(); }
  std::size_t size() const { return values_.size(); }

  double operator[](std::size_t i) const { return values_[i]; }
  double& operator[](std::size_t i) { return values_[i]; }

  std::span<const double> values() const { return values_; }
  std::span<double> mutable_values() { return values_; }
  auto begin() const { return values_.begin(); }
  auto end() const { return values_.end(); }

  double Norm() const {
    double sum = 0.0;
    for (double v : values_) sum += v * v;
    return std::sqrt(sum);
  }

  ParameterVector& operator+=(std::span<const double> other) {
    CheckDimension("ParameterVector::operator+=", dimension(), other.size());
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other[i];
    return *this;
  }
  ParameterVector& operator-=(std::span<const double> other) {
    CheckDimension("ParameterVector::operator-=", dimension(), other.size());
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other[i];
    return *this;
  }
  ParameterVector& operator*=(double scale) {
    for (double& v : values_) v *= scale;
    return *this;
  }

  friend ParameterVector operator+(ParameterVector a, const ParameterVector& b) {
    a += b.values();
    return a;
  }
  friend ParameterVector operator-(ParameterVector a, const ParameterVector& b) {
    a -= b.values();
    return a;
  }
  friend ParameterVector operator*(double s, ParameterVector a) {
    a *= s;
    return a;
  }
  friend bool operator==(const ParameterVector&,
                         const ParameterVector&) = default;

  bool AllFinite() const {
    for (double v : values_) {
      if (!std::isfinite(v)) return false;
    }
    return true;
  }

 private:
  void CheckFinite() const {
    if (!AllFinite()) {
      throw std::invalid_argument("ParameterVector: non-finite entry");
    }
  }

  std::vector<double> values_;
};

inline double SquaredDistance(std::span<const double> a,
                              std::span<const double> b) {
  CheckDimension("SquaredDistance", a.size(), b.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    sum += d * d;
  }
  return sum;
}

inline double Distance(std::span<const double> a, std::span<const double> b) {
  return std::sqrt(SquaredDistance(a, b));
}

inline double Distance(const ParameterVector& a, const ParameterVector& b) {
  return Distance(a.values(), b.values());
}

}  // namespace metricfl

#endif  // METRICFL_PARAMETER_VECTOR_HPP_
