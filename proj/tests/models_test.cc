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


#include "metricfl/models.hpp"

#include <cmath>
#include <vector>

#include "gradient_instances.hpp"
#include "gtest/gtest.h"
#include "metricfl/data.hpp"
#include "metricfl/rng.hpp"
#include "oracles.hpp"

namespace metricfl {
namespace {

using ::metricfl::testing::FiniteDifferenceGradient;
using ::metricfl::testing::RandomGradientInstance;
using ::metricfl::testing::RelativeError;

Batch OneSample(std::vector<double> x, double y) {
  const std::size_t d = x.size();
  return Batch{Matrix(1, d, std::move(x)), Matrix(1, 1, {y})};
}

TEST(ModelSpecTest, ParameterCounts) {
  EXPECT_EQ(ModelSpec::Linear(2).ParameterCount(), 2u);
  EXPECT_EQ(ModelSpec::Linear(3, 2).ParameterCount(), 6u);
  // 3 -> 2 -> 1: 6 + 2 + 2 + 1.
  EXPECT_EQ(ModelSpec::Mlp(3, {2}).ParameterCount(), 11u);
  EXPECT_EQ(ModelSpec::Mlp(4, {5, 3}, 2).ParameterCount(), 25u + 18u + 8u);
}

TEST(ModelSpecTest, RejectsDegenerateShapes) {
  EXPECT_THROW(ModelSpec::Linear(0).Validate(), std::invalid_argument);
  EXPECT_THROW(ModelSpec::Mlp(3, {0}).Validate(), std::invalid_argument);
  ModelSpec bad = ModelSpec::Linear(2);
  bad.hidden = {3};
  EXPECT_THROW(bad.Validate(), std::invalid_argument);
}

TEST(PredictTest, LinearIsDotProduct) {
  const ModelSpec spec = ModelSpec::Linear(2);
  const Matrix x(3, 2, {1, 0, 0, 1, 2, -1});
  const Matrix y = Predict(spec, ParameterVector{5.0, 6.0}, x);
  EXPECT_EQ(y.data, (std::vector<double>{5, 6, 4}));
}

TEST(PredictTest, MlpPackingOrder) {
  const ModelSpec spec = ModelSpec::Mlp(3, {2});
  // W1 = [[1,0,0],[0,-1,0]], b1 = [0, 0.5], W2 = [2, 3], b2 = 1.
  const ParameterVector p{1, 0, 0, 0, -1, 0, 0, 0.5, 2, 3, 1};
  // x = (1, 1, 7): hidden = relu(1, -0.5) = (1, 0), out = 2 + 1 = 3.
  // x = (-1, -2, 0): hidden = relu(-1, 2.5) = (0, 2.5), out = 7.5 + 1.
  const Matrix y = Predict(spec, p, Matrix(2, 3, {1, 1, 7, -1, -2, 0}));
  EXPECT_DOUBLE_EQ(y(0, 0), 3.0);
  EXPECT_DOUBLE_EQ(y(1, 0), 8.5);
}

TEST(PackTest, RoundTrip) {
  Rng rng(3);
  for (const ModelSpec& spec :
       {ModelSpec::Linear(4, 3), ModelSpec::Mlp(3, {2}), ModelSpec::Mlp(2, {4, 3}, 5)}) {
    std::vector<double> flat(spec.ParameterCount());
    for (double& v : flat) v = rng.Normal();
    const ParameterVector p(flat);
    EXPECT_EQ(Pack(spec, Unpack(spec, p)), p);
    const std::vector<DenseLayer> layers = Unpack(spec, p);
    const std::vector<DenseLayer> again = Unpack(spec, Pack(spec, layers));
    ASSERT_EQ(again.size(), layers.size());
    for (std::size_t l = 0; l < layers.size(); ++l) {
      EXPECT_EQ(again[l].weights, layers[l].weights);
      EXPECT_EQ(again[l].bias, layers[l].bias);
    }
  }
  EXPECT_THROW(Unpack(ModelSpec::Mlp(3, {2}), ParameterVector(10)), DimensionMismatch);
}

TEST(LossTest, RmseExample) {
  const ModelSpec spec = ModelSpec::Linear(1);
  const Batch batch{Matrix(2, 1, {1, 2}), Matrix(2, 1, {1, 4})};
  // Residuals (1 - 0, 4 - 0) at theta = 0: sqrt(17 / 2).
  EXPECT_DOUBLE_EQ(Loss(spec, ParameterVector{0.0}, batch, Objective::kRmse),
                   std::sqrt(8.5));
  // Exact fit of the first sample, residual 2 on the second.
  EXPECT_DOUBLE_EQ(Loss(spec, ParameterVector{1.0}, batch, Objective::kRmse),
                   std::sqrt(2.0));
}

TEST(LossTest, CrossEntropyUniformLogits) {
  const ModelSpec spec = ModelSpec::Linear(2, 4);
  const Batch batch{Matrix(3, 2, {1, 2, 3, 4, 5, 6}), Matrix(3, 1, {0, 3, 1})};
  EXPECT_NEAR(Loss(spec, ParameterVector(8), batch, Objective::kCrossEntropy),
              std::log(4.0), 1e-12);
  const Batch bad{Matrix(1, 2, {1, 2}), Matrix(1, 1, {4})};
  EXPECT_THROW(Loss(spec, ParameterVector(8), bad, Objective::kCrossEntropy),
               std::invalid_argument);
}

TEST(LossTest, RejectsMismatchedBatch) {
  const ModelSpec spec = ModelSpec::Linear(2);
  EXPECT_THROW(Loss(spec, ParameterVector(2), OneSample({1, 2, 3}, 0.0), Objective::kRmse),
               DimensionMismatch);
  EXPECT_THROW(Loss(spec, ParameterVector(2), Batch{}, Objective::kRmse),
               std::invalid_argument);
}

TEST(GradientTest, LinearAtZeroPointsAlongMinusYX) {
  const ModelSpec spec = ModelSpec::Linear(3);
  const std::vector<double> x{1.0, -2.0, 0.5};
  const double y = 3.0;
  const ParameterVector g =
      Gradient(spec, ParameterVector(3), OneSample(x, y), Objective::kRmse);
  // With one sample the rmse is |y - x^T theta|, so the gradient is -sign(y) x.
  for (std::size_t i = 0; i < 3; ++i) EXPECT_DOUBLE_EQ(g[i], -x[i]);
}

TEST(GradientTest, ZeroResidualGivesZero) {
  const ModelSpec spec = ModelSpec::Linear(2);
  const ParameterVector g =
      Gradient(spec, ParameterVector{1.0, 1.0}, OneSample({2, 3}, 5.0), Objective::kRmse);
  EXPECT_EQ(g, ParameterVector(2));
}

TEST(GradientTest, CrossEntropyOutputBiasAtUniformLogits) {
  // Zero weights give uniform logits; d loss / d b_c = (1/K - [c = y]) / m.
  const std::size_t k = 3, m = 4;
  const ModelSpec spec = ModelSpec::Mlp(2, {3}, k);
  const Batch batch{Matrix(m, 2, {1, 2, -1, 0, 3, 1, 0, -2}), Matrix(m, 1, {2, 2, 0, 2})};
  const ParameterVector g = Gradient(spec, ParameterVector(spec.ParameterCount()),
                                     batch, Objective::kCrossEntropy);
  const std::size_t bias0 = spec.ParameterCount() - k;
  const double counts[3] = {1, 0, 3};
  for (std::size_t c = 0; c < k; ++c) {
    const double expected = (m * (1.0 / k) - counts[c]) / m;
    EXPECT_NEAR(g[bias0 + c], expected, 1e-12) << "class " << c;
  }
  // Single sample of class c: the target bias carries (1/K - 1).
  const Batch one{Matrix(1, 2, {0.3, 0.1}), Matrix(1, 1, {1})};
  const ParameterVector g1 = Gradient(spec, ParameterVector(spec.ParameterCount()),
                                      one, Objective::kCrossEntropy);
  EXPECT_NEAR(g1[bias0 + 1], 1.0 / 3.0 - 1.0, 1e-12);
  EXPECT_NEAR(g1[bias0 + 0], 1.0 / 3.0, 1e-12);
}

TEST(GradientTest, MatchesFiniteDifferences) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto inst = RandomGradientInstance(seed);
    const ParameterVector g =
        Gradient(inst.spec, inst.params, inst.batch, inst.objective);
    const std::vector<double> fd = FiniteDifferenceGradient(
        [&](const std::vector<double>& p) {
          return Loss(inst.spec, ParameterVector(p), inst.batch, inst.objective);
        },
        std::vector<double>(inst.params.begin(), inst.params.end()));
    EXPECT_LT(RelativeError({g.begin(), g.end()}, fd), 1e-4) << "instance " << seed;
  }
}

TEST(LocalUpdateTest, FullBatchSingleEpochIsOneStep) {
  Rng data_rng(4);
  const ModelSpec spec = ModelSpec::Linear(2);
  Batch data{Matrix(7, 2), Matrix(7, 1)};
  for (double& v : data.features.data) v = data_rng.Normal();
  for (double& v : data.targets.data) v = data_rng.Normal(0, 3);
  const ParameterVector theta{0.3, -0.2};
  const LocalUpdateOptions options{0.1, 1, 7, Objective::kRmse};
  Rng rng(9);
  const ParameterVector updated = LocalUpdate(spec, theta, data, options, rng);
  const ParameterVector expected =
      theta - 0.1 * Gradient(spec, theta, data, Objective::kRmse);
  for (std::size_t i = 0; i < 2; ++i) EXPECT_NEAR(updated[i], expected[i], 1e-12);
  EXPECT_EQ(theta, (ParameterVector{0.3, -0.2}));
}

TEST(LocalUpdateTest, DeterministicGivenSeed) {
  const ModelSpec spec = ModelSpec::Mlp(3, {2});
  Rng data_rng(6);
  Batch data{Matrix(23, 3), Matrix(23, 1)};
  for (double& v : data.features.data) v = data_rng.Normal();
  for (double& v : data.targets.data) v = data_rng.Normal();
  Rng init(1);
  const ParameterVector theta = InitialParameters(spec, init);
  const LocalUpdateOptions options{0.05, 3, 4, Objective::kRmse};
  Rng a(77), b(77), c(78);
  const ParameterVector pa = LocalUpdate(spec, theta, data, options, a);
  EXPECT_EQ(pa, LocalUpdate(spec, theta, data, options, b));
  EXPECT_NE(pa, LocalUpdate(spec, theta, data, options, c));
}

TEST(LocalUpdateTest, RejectsBadInput) {
  const ModelSpec spec = ModelSpec::Linear(2);
  Rng rng(0);
  EXPECT_THROW(LocalUpdate(spec, ParameterVector(2), Batch{}, {}, rng),
               std::invalid_argument);
  LocalUpdateOptions zero_batch;
  zero_batch.batch_size = 0;
  EXPECT_THROW(LocalUpdate(spec, ParameterVector(2), OneSample({1, 1}, 1), zero_batch, rng),
               std::invalid_argument);
}

TEST(LocalUpdateTest, ConvergesToLeastSquaresOnOneCluster) {
  SyntheticOptions options;
  options.clients = 50;
  options.thetas = {ParameterVector{5.0, 6.0}};
  Rng data_rng(11);
  const ClientPopulation pop = GenerateSynthetic(options, data_rng);
  std::vector<std::vector<double>> xs;
  std::vector<double> ys;
  for (const PopulationClient& c : pop.clients) {
    for (std::size_t s = 0; s < c.data.size(); ++s) {
      xs.push_back({c.data.features(s, 0), c.data.features(s, 1)});
      ys.push_back(c.data.targets(s, 0));
    }
  }
  const std::vector<double> oracle = testing::LeastSquares(xs, ys);
  EXPECT_LT(std::hypot(oracle[0] - 5.0, oracle[1] - 6.0), 0.2);

  // Repeated local updates on the pooled cluster data.
  Batch pooled{Matrix(xs.size(), 2), Matrix(xs.size(), 1)};
  for (std::size_t i = 0; i < xs.size(); ++i) {
    pooled.features(i, 0) = xs[i][0];
    pooled.features(i, 1) = xs[i][1];
    pooled.targets(i, 0) = ys[i];
  }
  const ModelSpec spec = ModelSpec::Linear(2);
  ParameterVector theta(2);
  Rng rng(12);
  for (int i = 0; i < 20; ++i) {
    theta = LocalUpdate(spec, theta, pooled, {0.1, 1, 10, Objective::kRmse}, rng);
  }
  EXPECT_LT(std::hypot(theta[0] - oracle[0], theta[1] - oracle[1]), 0.5);
  EXPECT_LT(std::hypot(theta[0] - 5.0, theta[1] - 6.0), 0.5);
}

TEST(InitialParametersTest, ShapesAndRanges) {
  Rng rng(2);
  const ModelSpec mlp = ModelSpec::Mlp(4, {2});
  const ParameterVector p = InitialParameters(mlp, rng);
  ASSERT_EQ(p.size(), mlp.ParameterCount());
  for (std::size_t i = 0; i < 10; ++i) EXPECT_LE(std::abs(p[i]), 0.5);
  for (std::size_t i = 10; i < 13; ++i) EXPECT_LE(std::abs(p[i]), 1.0 / std::sqrt(2.0));
  EXPECT_EQ(InitialParameters(ModelSpec::Linear(2), rng).size(), 2u);
}

}  // namespace
}  // namespace metricfl
