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

// Small predictors trained on a flat parameter vector.
//
// Parameter packing (the flat vector is what gets sanitized and clustered):
//   linear: one weight matrix of shape output_dim x input_dim, row-major,
//           no bias. With output_dim = 1 this is theta in y = x^T theta.
//   mlp:    for each layer in order, its weight matrix (out x in, row-major)
//           followed by its bias vector. Hidden layers use ReLU; the output
//           layer is affine.

#ifndef METRICFL_MODELS_HPP_
#define METRICFL_MODELS_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "metricfl/parameter_vector.hpp"
#include "metricfl/rng.hpp"

namespace metricfl {

// Row-major dense matrix.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}
  Matrix(std::size_t r, std::size_t c, std::vector<double> values)
      : rows(r), cols(c), data(std::move(values)) {
    if (data.size() != r * c) {
      throw std::invalid_argument("Matrix: value count does not match shape");
    }
  }

  double operator()(std::size_t r, std::size_t c) const {
    return data[r * cols + c];
  }
  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  std::span<const double> row(std::size_t r) const {
    return std::span<const double>(data).subspan(r * cols, cols);
  }
  friend bool operator==(const Matrix&, const Matrix&) = default;
};

// Supervised samples. For regression `targets` has one column per output; for
// classification it has a single column holding the class index.
struct Batch {
  Matrix features;
  Matrix targets;

  std::size_t size() const { return features.rows; }
  bool empty() const { return features.rows == 0; }

  void Validate() const {
    if (features.rows != targets.rows) {
      throw std::invalid_argument("Batch: feature and target row counts differ");
    }
    for (double v : features.data) {
      if (!std::isfinite(v)) throw std::invalid_argument("Batch: non-finite feature");
    }
    for (double v : targets.data) {
      if (!std::isfinite(v)) throw std::invalid_argument("Batch: non-finite target");
    }
  }

  Batch Select(std::span<const std::size_t> indices) const {
    Batch out{Matrix(indices.size(), features.cols),
              Matrix(indices.size(), targets.cols)};
    for (std::size_t i = 0; i < indices.size(); ++i) {
      std::copy_n(features.data.begin() + indices[i] * features.cols,
                  features.cols, out.features.data.begin() + i * features.cols);
      std::copy_n(targets.data.begin() + indices[i] * targets.cols, targets.cols,
                  out.targets.data.begin() + i * targets.cols);
    }
    return out;
  }
};

enum class ModelKind { kLinear, kMlp };
enum class Objective { kRmse, kCrossEntropy };

struct LayerShape {
  std::size_t in = 0;
  std::size_t out = 0;
  bool bias = true;
  bool relu = false;

  std::size_t ParameterCount() const { return in * out + (bias ? out : 0); }
};

struct ModelSpec {
  ModelKind kind = ModelKind::kLinear;
  std::size_t input_dim = 1;
  std::vector<std::size_t> hidden;  // mlp only
  std::size_t output_dim = 1;

  static ModelSpec Linear(std::size_t input_dim, std::size_t output_dim = 1) {
    return {ModelKind::kLinear, input_dim, {}, output_dim};
  }
  static ModelSpec Mlp(std::size_t input_dim, std::vector<std::size_t> hidden,
                       std::size_t output_dim = 1) {
    return {ModelKind::kMlp, input_dim, std::move(hidden), output_dim};
  }

  void Validate() const {
    if (input_dim == 0 || output_dim == 0) {
      throw std::invalid_argument("ModelSpec: dimensions must be >= 1");
    }
    if (kind == ModelKind::kLinear && !hidden.empty()) {
      throw std::invalid_argument("ModelSpec: linear model has no hidden layers");
    }
    for (std::size_t w : hidden) {
      if (w == 0) throw std::invalid_argument("ModelSpec: zero-width layer");
    }
  }

  std::vector<LayerShape> Layers() const {
    if (kind == ModelKind::kLinear) {
      return {LayerShape{input_dim, output_dim, false, false}};
    }
    std::vector<LayerShape> layers;
    std::size_t in = input_dim;
    for (std::size_t width : hidden) {
      layers.push_back({in, width, true, true});
      in = width;
    }
    layers.push_back({in, output_dim, true, false});
    return layers;
  }

  std::size_t ParameterCount() const {
    std::size_t n = 0;
    for (const LayerShape& l : Layers()) n += l.ParameterCount();
    return n;
  }
};

struct DenseLayer {
  Matrix weights;  // out x in
  std::vector<double> bias;
};

inline std::vector<DenseLayer> Unpack(const ModelSpec& spec,
                                      const ParameterVector& params) {
  CheckDimension("Unpack", spec.ParameterCount(), params.dimension());
  std::vector<DenseLayer> layers;
  std::size_t offset = 0;
  for (const LayerShape& shape : spec.Layers()) {
    DenseLayer layer;
    layer.weights = Matrix(shape.out, shape.in);
    for (double& w : layer.weights.data) w = params[offset++];
    if (shape.bias) {
      layer.bias.resize(shape.out);
      for (double& b : layer.bias) b = params[offset++];
    }
    layers.push_back(std::move(layer));
  }
  return layers;
}

inline ParameterVector Pack(const ModelSpec& spec,
                            const std::vector<DenseLayer>& layers) {
  const std::vector<LayerShape> shapes = spec.Layers();
  if (layers.size() != shapes.size()) {
    throw std::invalid_argument("Pack: layer count does not match spec");
  }
  std::vector<double> flat;
  flat.reserve(spec.ParameterCount());
  for (std::size_t l = 0; l < shapes.size(); ++l) {
    CheckDimension("Pack(weights)", shapes[l].in * shapes[l].out,
                   layers[l].weights.data.size());
    CheckDimension("Pack(bias)", shapes[l].bias ? shapes[l].out : 0,
                   layers[l].bias.size());
    flat.insert(flat.end(), layers[l].weights.data.begin(),
                layers[l].weights.data.end());
    flat.insert(flat.end(), layers[l].bias.begin(), layers[l].bias.end());
  }
  return ParameterVector(std::move(flat));
}

namespace internal {

// Activations for every layer input plus the final output, per sample.
struct ForwardTrace {
  std::vector<Matrix> inputs;  // inputs[l]: rows x layer l fan-in
  Matrix output;
};

inline ForwardTrace Forward(const ModelSpec& spec,
                            const std::vector<DenseLayer>& layers,
                            const Matrix& features) {
  CheckDimension("Forward(features)", spec.input_dim, features.cols);
  const std::vector<LayerShape> shapes = spec.Layers();
  ForwardTrace trace;
  Matrix current = features;
  for (std::size_t l = 0; l < shapes.size(); ++l) {
    const LayerShape& shape = shapes[l];
    const DenseLayer& layer = layers[l];
    Matrix next(current.rows, shape.out);
    for (std::size_t r = 0; r < current.rows; ++r) {
      for (std::size_t o = 0; o < shape.out; ++o) {
        double z = shape.bias ? layer.bias[o] : 0.0;
        for (std::size_t i = 0; i < shape.in; ++i) {
          z += layer.weights(o, i) * current(r, i);
        }
        next(r, o) = shape.relu ? std::max(z, 0.0) : z;
      }
    }
    trace.inputs.push_back(std::move(current));
    current = std::move(next);
  }
  trace.output = std::move(current);
  return trace;
}

inline std::size_t ClassIndex(double target, std::size_t classes) {
  const double rounded = std::round(target);
  if (rounded < 0.0 || rounded >= static_cast<double>(classes) ||
      rounded != target) {
    throw std::invalid_argument("cross-entropy target is not a class index: " +
                                std::to_string(target));
  }
  return static_cast<std::size_t>(rounded);
}

inline void CheckBatch(const ModelSpec& spec, const Batch& batch,
                       Objective objective) {
  if (batch.empty()) throw std::invalid_argument("empty batch");
  if (batch.features.rows != batch.targets.rows) {
    throw std::invalid_argument("Batch: feature and target row counts differ");
  }
  CheckDimension("Batch(features)", spec.input_dim, batch.features.cols);
  CheckDimension("Batch(targets)",
                 objective == Objective::kRmse ? spec.output_dim : 1,
                 batch.targets.cols);
}

}  // namespace internal

// Predictions, one row per sample and one column per output.
inline Matrix Predict(const ModelSpec& spec, const ParameterVector& params,
                      const Matrix& features) {
  return internal::Forward(spec, Unpack(spec, params), features).output;
}

// rmse: ||Y - f(X)||_2 / sqrt(|batch|).
// cross_entropy: mean negative log-softmax of the target class.
inline double Loss(const ModelSpec& spec, const ParameterVector& params,
                   const Batch& batch, Objective objective) {
  internal::CheckBatch(spec, batch, objective);
  const Matrix out = Predict(spec, params, batch.features);
  const double m = static_cast<double>(batch.size());
  if (objective == Objective::kRmse) {
    double sum = 0.0;
    for (std::size_t i = 0; i < out.data.size(); ++i) {
      const double r = batch.targets.data[i] - out.data[i];
      sum += r * r;
    }
    return std::sqrt(sum / m);
  }
  double total = 0.0;
  for (std::size_t r = 0; r < out.rows; ++r) {
    const std::size_t target =
        internal::ClassIndex(batch.targets(r, 0), out.cols);
    double peak = out(r, 0);
    for (std::size_t c = 1; c < out.cols; ++c) peak = std::max(peak, out(r, c));
    double sum = 0.0;
    for (std::size_t c = 0; c < out.cols; ++c) sum += std::exp(out(r, c) - peak);
    total += peak + std::log(sum) - out(r, target);
  }
  return total / m;
}

// Analytic gradient of Loss with respect to the flat parameter vector. For
// rmse with an exactly zero residual the zero vector is returned.
inline ParameterVector Gradient(const ModelSpec& spec,
                                const ParameterVector& params,
                                const Batch& batch, Objective objective) {
  internal::CheckBatch(spec, batch, objective);
  const std::vector<DenseLayer> layers = Unpack(spec, params);
  const std::vector<LayerShape> shapes = spec.Layers();
  internal::ForwardTrace trace = internal::Forward(spec, layers, batch.features);
  const Matrix& out = trace.output;
  const double m = static_cast<double>(batch.size());

  // d loss / d output.
  Matrix delta(out.rows, out.cols);
  if (objective == Objective::kRmse) {
    double sum = 0.0;
    for (std::size_t i = 0; i < out.data.size(); ++i) {
      const double r = batch.targets.data[i] - out.data[i];
      sum += r * r;
    }
    const double norm = std::sqrt(sum);
    if (norm == 0.0) return ParameterVector(spec.ParameterCount());
    const double scale = 1.0 / (norm * std::sqrt(m));
    for (std::size_t i = 0; i < out.data.size(); ++i) {
      delta.data[i] = (out.data[i] - batch.targets.data[i]) * scale;
    }
  } else {
    for (std::size_t r = 0; r < out.rows; ++r) {
      const std::size_t target =
          internal::ClassIndex(batch.targets(r, 0), out.cols);
      double peak = out(r, 0);
      for (std::size_t c = 1; c < out.cols; ++c) peak = std::max(peak, out(r, c));
      double sum = 0.0;
      for (std::size_t c = 0; c < out.cols; ++c) sum += std::exp(out(r, c) - peak);
      for (std::size_t c = 0; c < out.cols; ++c) {
        const double p = std::exp(out(r, c) - peak) / sum;
        delta(r, c) = (p - (c == target ? 1.0 : 0.0)) / m;
      }
    }
  }

  std::vector<DenseLayer> grads(layers.size());
  for (std::size_t l = shapes.size(); l-- > 0;) {
    const LayerShape& shape = shapes[l];
    const Matrix& input = trace.inputs[l];
    DenseLayer& g = grads[l];
    g.weights = Matrix(shape.out, shape.in);
    if (shape.bias) g.bias.assign(shape.out, 0.0);
    for (std::size_t r = 0; r < input.rows; ++r) {
      for (std::size_t o = 0; o < shape.out; ++o) {
        const double d = delta(r, o);
        if (d == 0.0) continue;
        for (std::size_t i = 0; i < shape.in; ++i) g.weights(o, i) += d * input(r, i);
        if (shape.bias) g.bias[o] += d;
      }
    }
    if (l == 0) break;
    // Backpropagate into the previous layer's (post-ReLU) activations.
    Matrix prev(input.rows, shape.in);
    for (std::size_t r = 0; r < input.rows; ++r) {
      for (std::size_t i = 0; i < shape.in; ++i) {
        // ReLU derivative taken as 0 at the kink.
        if (shapes[l - 1].relu && input(r, i) <= 0.0) continue;
        double sum = 0.0;
        for (std::size_t o = 0; o < shape.out; ++o) {
          sum += delta(r, o) * layers[l].weights(o, i);
        }
        prev(r, i) = sum;
      }
    }
    delta = std::move(prev);
  }
  return Pack(spec, grads);
}

struct LocalUpdateOptions {
  double step_size = 0.1;
  std::size_t epochs = 1;
  std::size_t batch_size = 10;
  Objective objective = Objective::kRmse;
};

// Mini-batch SGD. Each epoch reshuffles the dataset with `rng` and walks it in
// batches of `batch_size` (the last one may be smaller).
inline ParameterVector LocalUpdate(const ModelSpec& spec,
                                   const ParameterVector& params,
                                   const Batch& dataset,
                                   const LocalUpdateOptions& options, Rng& rng) {
  if (dataset.empty()) throw std::invalid_argument("LocalUpdate: empty dataset");
  if (options.batch_size < 1) {
    throw std::invalid_argument("LocalUpdate: batch size must be >= 1");
  }
  CheckDimension("LocalUpdate", spec.ParameterCount(), params.dimension());
  ParameterVector theta = params;
  std::vector<std::size_t> order(dataset.size());
  for (std::size_t e = 0; e < options.epochs; ++e) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    rng.Shuffle(order);
    for (std::size_t start = 0; start < order.size(); start += options.batch_size) {
      const std::size_t stop = std::min(order.size(), start + options.batch_size);
      const Batch batch = dataset.Select(
          std::span<const std::size_t>(order).subspan(start, stop - start));
      const ParameterVector g = Gradient(spec, theta, batch, options.objective);
      for (std::size_t i = 0; i < theta.size(); ++i) {
        theta[i] -= options.step_size * g[i];
      }
    }
  }
  if (!theta.AllFinite()) {
    throw std::runtime_error("LocalUpdate: parameters diverged");
  }
  return theta;
}

// Initial parameters: standard normal entries for linear models, uniform in
// [-1/sqrt(fan_in), 1/sqrt(fan_in)] per layer for MLPs.
inline ParameterVector InitialParameters(const ModelSpec& spec, Rng& rng) {
  std::vector<double> flat;
  flat.reserve(spec.ParameterCount());
  if (spec.kind == ModelKind::kLinear) {
    for (std::size_t i = 0; i < spec.ParameterCount(); ++i) {
      flat.push_back(rng.Normal());
    }
    return ParameterVector(std::move(flat));
  }
  for (const LayerShape& shape : spec.Layers()) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(shape.in));
    for (std::size_t i = 0; i < shape.ParameterCount(); ++i) {
      flat.push_back(rng.Uniform(-bound, bound));
    }
  }
  return ParameterVector(std::move(flat));
}

}  // namespace metricfl

#endif  // METRICFL_MODELS_HPP_
