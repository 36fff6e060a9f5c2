// Copyright 2026 The LeakAudit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "leakaudit/compression.h"

#include <cmath>
#include <filesystem>
#include <random>
#include <set>
#include <vector>

#include <gtest/gtest.h>

#include "leakaudit/error.h"

namespace leakaudit {
namespace {

FcnModel SmallModel(uint64_t seed) {
  const std::vector<int> sizes{6, 12, 8, 3};
  return FcnModel::Create(sizes, 0.0, seed);
}

TabularDataset RandomDataset(int n, int d, int classes, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  TabularDataset data;
  data.features.resize(n, d);
  for (Eigen::Index i = 0; i < data.features.size(); ++i) {
    data.features.data()[i] = g(rng);
  }
  data.class_count = classes;
  for (int i = 0; i < n; ++i) data.labels.push_back(i % classes);
  return data;
}

// Single-layer model with the given weights (1 x n).
FcnModel RowModel(const std::vector<double>& w) {
  const std::vector<int> sizes{static_cast<int>(w.size()), 1};
  FcnModel m = FcnModel::Zeros(sizes);
  for (size_t i = 0; i < w.size(); ++i) m.weights[0](0, i) = w[i];
  return m;
}

size_t ZeroCount(const FcnModel& m) {
  size_t zeros = 0;
  for (const auto& w : m.weights) zeros += (w.array() == 0.0).count();
  return zeros;
}

std::set<double> Distinct(const Matrix& w) {
  return {w.data(), w.data() + w.size()};
}

TEST(PruneTest, HandExample) {
  const CompressedModel c = PruneL1(RowModel({0.5, -0.1, 0.3, -0.8}), 0.5);
  EXPECT_EQ(c.model.weights[0](0, 0), 0.5);
  EXPECT_EQ(c.model.weights[0](0, 1), 0.0);
  EXPECT_EQ(c.model.weights[0](0, 2), 0.0);
  EXPECT_EQ(c.model.weights[0](0, 3), -0.8);
  EXPECT_EQ(c.degree_tag, 50);
  EXPECT_EQ(c.Name(), "prune50");
}

TEST(PruneTest, ZeroSparsityKeepsEverything) {
  const FcnModel m = SmallModel(1);
  const CompressedModel c = PruneL1(m, 0.0);
  EXPECT_TRUE(c.model == m);
  for (const auto& mask : c.constraint.prune_masks()) {
    for (uint8_t keep : mask) EXPECT_EQ(keep, 1);
  }
}

TEST(PruneTest, FullSparsityZeroesAllWeightsButNotBiases) {
  FcnModel m = SmallModel(2);
  for (auto& b : m.biases) b.setConstant(0.25);
  const CompressedModel c = PruneL1(m, 1.0);
  EXPECT_EQ(ZeroCount(c.model), m.weight_count());
  for (const auto& b : c.model.biases) EXPECT_TRUE((b.array() == 0.25).all());
}

TEST(PruneTest, ExactSparsityAndIdempotence) {
  const FcnModel m = SmallModel(3);
  for (double s : {0.1, 0.33, 0.6, 0.7, 0.8, 0.9, 0.95}) {
    for (PruneScope scope : {PruneScope::kGlobal, PruneScope::kPerLayer}) {
      const CompressedModel c = PruneL1(m, s, scope);
      const double target = s * static_cast<double>(m.weight_count());
      EXPECT_LE(std::abs(static_cast<double>(ZeroCount(c.model)) - target),
                scope == PruneScope::kGlobal ? 1.0
                                             : static_cast<double>(
                                                   m.num_layers()));
      EXPECT_NEAR(c.constraint.Sparsity(),
                  static_cast<double>(ZeroCount(c.model)) / m.weight_count(),
                  1e-15);
      const CompressedModel again = PruneL1(c.model, s, scope);
      EXPECT_TRUE(again.model == c.model);
      EXPECT_TRUE(again.constraint == c.constraint);
      c.constraint.Check(c.model);
    }
  }
}

TEST(PruneTest, GlobalKeepsLargestMagnitudes) {
  const FcnModel m = SmallModel(4);
  const CompressedModel c = PruneL1(m, 0.6);
  double max_pruned = 0.0;
  double min_kept = 1e300;
  for (size_t l = 0; l < m.num_layers(); ++l) {
    for (Eigen::Index i = 0; i < m.weights[l].size(); ++i) {
      const double mag = std::abs(m.weights[l].data()[i]);
      if (c.constraint.prune_masks()[l][static_cast<size_t>(i)]) {
        min_kept = std::min(min_kept, mag);
      } else {
        max_pruned = std::max(max_pruned, mag);
      }
    }
  }
  EXPECT_LE(max_pruned, min_kept);
}

TEST(PruneTest, RejectsSparsityOutsideUnitInterval) {
  EXPECT_THROW(PruneL1(SmallModel(1), 1.2), Error);
}

TEST(PruneTest, FinetunePreservesMaskExactly) {
  const TabularDataset data = RandomDataset(60, 6, 3, 1);
  const CompressedModel c = PruneL1(SmallModel(5), 0.8);
  TrainConfig config;
  config.max_epochs = 10;
  config.batch_size = 8;
  const CompressedModel tuned = FinetuneCompressed(c, data, data, config);
  EXPECT_TRUE(tuned.constraint == c.constraint);
  for (size_t l = 0; l < tuned.model.num_layers(); ++l) {
    const auto& mask = c.constraint.prune_masks()[l];
    for (size_t i = 0; i < mask.size(); ++i) {
      if (!mask[i]) EXPECT_EQ(tuned.model.weights[l].data()[i], 0.0);
    }
  }
  EXPECT_FALSE(tuned.model == c.model);
}

TEST(QuantizeTest, HandExample) {
  const CompressedModel c =
      QuantizeInt8(RowModel({-1.0, 0.5, 1.0}), QuantMode::kPostTraining);
  EXPECT_EQ(QuantizeValue(-1.0, 1.0), -127);
  EXPECT_EQ(QuantizeValue(0.5, 1.0), 64);
  EXPECT_EQ(QuantizeValue(1.0, 1.0), 127);
  EXPECT_DOUBLE_EQ(c.model.weights[0](0, 0), -1.0);
  EXPECT_NEAR(c.model.weights[0](0, 1), 0.5039370078740157, 1e-15);
  EXPECT_DOUBLE_EQ(c.model.weights[0](0, 2), 1.0);
  EXPECT_EQ(c.degree_tag, 8);
  EXPECT_EQ(c.Name(), "int8");
}

TEST(QuantizeTest, RoundsHalfAwayFromZero) {
  EXPECT_EQ(QuantizeValue(0.5 / 127.0, 1.0), 1);
  EXPECT_EQ(QuantizeValue(-0.5 / 127.0, 1.0), -1);
  EXPECT_EQ(QuantizeValue(2.5 / 127.0, 1.0), 3);
}

TEST(QuantizeTest, AllZeroLayerUnchanged) {
  const FcnModel m = RowModel({0.0, 0.0, 0.0});
  const CompressedModel c = QuantizeInt8(m, QuantMode::kPostTraining);
  EXPECT_TRUE(c.model == m);
  EXPECT_DOUBLE_EQ(c.constraint.quant_ranges()[0] / kInt8Max, 1.0);
  c.constraint.Check(c.model);
}

TEST(QuantizeTest, RoundTripErrorWithinHalfStep) {
  for (uint64_t seed = 0; seed < 5; ++seed) {
    const FcnModel m = SmallModel(seed);
    const CompressedModel c = QuantizeInt8(m, QuantMode::kPostTraining);
    for (size_t l = 0; l < m.num_layers(); ++l) {
      const double step = c.constraint.quant_ranges()[l] / kInt8Max;
      EXPECT_GT(step, 0.0);
      const double err =
          (c.model.weights[l] - m.weights[l]).cwiseAbs().maxCoeff();
      EXPECT_LE(err, step / 2 * (1 + 1e-12));
      EXPECT_LE(Distinct(c.model.weights[l]).size(), 255u);
    }
  }
}

TEST(QuantizeTest, Idempotent) {
  const CompressedModel once =
      QuantizeInt8(SmallModel(6), QuantMode::kPostTraining);
  const CompressedModel twice =
      QuantizeInt8(once.model, QuantMode::kPostTraining);
  EXPECT_TRUE(twice.model == once.model);
}

TEST(QuantizeTest, QatEndsOnGrid) {
  const TabularDataset data = RandomDataset(48, 6, 3, 2);
  QatSettings qat;
  qat.train_set = &data;
  qat.config.max_epochs = 10;
  qat.config.batch_size = 8;
  const CompressedModel c =
      QuantizeInt8(SmallModel(7), QuantMode::kQuantAwareTraining, qat);
  c.constraint.Check(c.model);
  for (size_t l = 0; l < c.model.num_layers(); ++l) {
    const double range = c.constraint.quant_ranges()[l];
    for (Eigen::Index i = 0; i < c.model.weights[l].size(); ++i) {
      const double w = c.model.weights[l].data()[i];
      EXPECT_EQ(DequantizeValue(QuantizeValue(w, range), range), w);
    }
  }
}

TEST(QuantizeTest, QatWithoutDataIsConfigurationError) {
  try {
    QuantizeInt8(SmallModel(1), QuantMode::kQuantAwareTraining);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kConfiguration);
  }
}

TEST(ClusterTest, HandExampleTwoClusters) {
  for (uint64_t seed = 0; seed < 10; ++seed) {
    const CompressedModel c =
        ClusterWeights(RowModel({1.0, 1.1, -2.0, -2.1}), 2, seed);
    const auto values = Distinct(c.model.weights[0]);
    ASSERT_EQ(values.size(), 2u);
    EXPECT_NEAR(*values.begin(), -2.05, 1e-12);
    EXPECT_NEAR(*values.rbegin(), 1.05, 1e-12);
  }
}

TEST(ClusterTest, OneClusterPerDistinctValueIsIdentity) {
  const FcnModel m = RowModel({0.3, -0.7, 0.3, 1.5, 2.0});
  EXPECT_TRUE(ClusterWeights(m, 4, 3).model == m);
  EXPECT_TRUE(ClusterWeights(m, 9, 3).model == m);
}

TEST(ClusterTest, ConstantLayerStaysConstant) {
  const FcnModel m = RowModel(std::vector<double>(7, 0.123));
  for (int n : {1, 2, 8}) EXPECT_TRUE(ClusterWeights(m, n, 1).model == m);
}

TEST(ClusterTest, AtMostNDistinctValuesPerLayer) {
  const FcnModel m = SmallModel(8);
  for (int n : {4, 8, 16}) {
    const CompressedModel c = ClusterWeights(m, n, 2);
    c.constraint.Check(c.model);
    for (size_t l = 0; l < m.num_layers(); ++l) {
      EXPECT_LE(Distinct(c.model.weights[l]).size(), static_cast<size_t>(n));
      for (uint32_t a : c.constraint.clusters()[l].assignment) {
        EXPECT_LT(a, c.constraint.clusters()[l].centroids.size());
      }
    }
  }
  EXPECT_LT(ClusterWeights(m, 16, 1).degree_tag,
            ClusterWeights(m, 8, 1).degree_tag);
  EXPECT_LT(ClusterWeights(m, 8, 1).degree_tag,
            ClusterWeights(m, 4, 1).degree_tag);
}

TEST(ClusterTest, LloydObjectiveIsMonotone) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> values(200);
    for (double& v : values) v = g(rng);
    const KMeansResult km = KMeans1D(values, 2 + trial % 15, trial);
    for (size_t i = 1; i < km.sse_history.size(); ++i) {
      EXPECT_LE(km.sse_history[i], km.sse_history[i - 1] * (1 + 1e-12));
    }
  }
}

TEST(ClusterTest, SharedGradientIsClusterSum) {
  const FcnModel m = RowModel({1.0, 1.1, -2.0, -2.1});
  const CompressedModel c = ClusterWeights(m, 2, 0);
  const auto& assignment = c.constraint.clusters()[0].assignment;
  ASSERT_EQ(assignment[0], assignment[1]);
  Gradients g = Gradients::ZerosLike(c.model);
  g.weights[0] << 0.3, -0.1, 0.7, 0.2;
  c.constraint.AdjustGradients(g);
  EXPECT_DOUBLE_EQ(g.weights[0](0, 0), 0.2);
  EXPECT_DOUBLE_EQ(g.weights[0](0, 1), 0.2);
  EXPECT_DOUBLE_EQ(g.weights[0](0, 2), 0.9);
  EXPECT_DOUBLE_EQ(g.weights[0](0, 3), 0.9);
}

TEST(ClusterTest, FinetuneKeepsSharedValues) {
  const TabularDataset data = RandomDataset(60, 6, 3, 3);
  const CompressedModel c = ClusterWeights(SmallModel(9), 2, 4);
  TrainConfig config;
  config.max_epochs = 1;
  config.batch_size = 60;
  const CompressedModel one_step = FinetuneCompressed(c, data, data, config);
  for (const auto& w : one_step.model.weights) {
    EXPECT_LE(Distinct(w).size(), 2u);
  }
  config.max_epochs = 10;
  config.batch_size = 8;
  const CompressedModel tuned = FinetuneCompressed(c, data, data, config);
  tuned.constraint.Check(tuned.model);
  for (size_t l = 0; l < tuned.model.num_layers(); ++l) {
    EXPECT_LE(Distinct(tuned.model.weights[l]).size(), 2u);
    const auto& layer = tuned.constraint.clusters()[l];
    for (size_t i = 0; i < layer.assignment.size(); ++i) {
      EXPECT_EQ(tuned.model.weights[l].data()[i],
                layer.centroids[layer.assignment[i]]);
    }
  }
}

TEST(ConstraintTest, CheckRejectsViolations) {
  CompressedModel pruned = PruneL1(SmallModel(1), 0.5);
  EXPECT_TRUE(pruned.constraint.IsSatisfiedBy(pruned.model));
  for (size_t i = 0; i < pruned.constraint.prune_masks()[0].size(); ++i) {
    if (!pruned.constraint.prune_masks()[0][i]) {
      pruned.model.weights[0].data()[i] = 1e-3;
      break;
    }
  }
  EXPECT_FALSE(pruned.constraint.IsSatisfiedBy(pruned.model));
  try {
    pruned.constraint.Check(pruned.model);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kValidation);
  }
}

TEST(CheckpointTest, CompressedRoundTrip) {
  const auto dir =
      std::filesystem::temp_directory_path() / "leakaudit_compression_test";
  std::filesystem::create_directories(dir);
  const FcnModel m = SmallModel(10);
  for (const CompressedModel& c :
       {PruneL1(m, 0.7), QuantizeInt8(m, QuantMode::kPostTraining),
        ClusterWeights(m, 8, 1)}) {
    const auto path = dir / (c.Name() + ".ckpt");
    SaveCompressedModel(path, c);
    const CompressedModel back = LoadCompressedModel(path);
    EXPECT_TRUE(back.model == c.model);
    EXPECT_TRUE(back.constraint == c.constraint);
    EXPECT_EQ(back.degree_tag, c.degree_tag);
  }
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace leakaudit
