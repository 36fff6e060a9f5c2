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

#ifndef LEAKAUDIT_COMPRESSION_H_
#define LEAKAUDIT_COMPRESSION_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "leakaudit/data.h"
#include "leakaudit/nn.h"

namespace leakaudit {

enum class CompressionKind { kPruneMask, kClusterAssignment, kFakeQuant };

std::string_view CompressionKindName(CompressionKind kind);

struct LayerClusters {
  std::vector<uint32_t> assignment;  // one entry per weight, row-major
  std::vector<double> centroids;
};

// Symmetric per-tensor int8 grid: q in [-127, 127], value = q * range / 127.
// `range` is the tensor's max |w| (127 for an all-zero tensor, i.e. scale 1).
inline constexpr int kInt8Max = 127;
double QuantRange(std::span<const double> weights);
int QuantizeValue(double w, double range);  // round half away from zero
double DequantizeValue(int q, double range);

// The set a compressed model must stay inside while it is fine-tuned.
// Applies to weight matrices only; biases are never constrained.
class CompressionConstraint : public TrainingConstraint {
 public:
  CompressionConstraint() = default;

  // masks[l][i] != 0 keeps weight i of layer l.
  static CompressionConstraint PruneMask(
      std::vector<std::vector<uint8_t>> masks);
  static CompressionConstraint Clusters(std::vector<LayerClusters> layers);
  static CompressionConstraint FakeQuant(std::vector<double> ranges);

  CompressionKind kind() const { return kind_; }
  const std::vector<std::vector<uint8_t>>& prune_masks() const {
    return masks_;
  }
  const std::vector<LayerClusters>& clusters() const { return clusters_; }
  const std::vector<double>& quant_ranges() const { return ranges_; }

  // Fraction of pruned weights (kPruneMask only; 0 otherwise).
  double Sparsity() const;

  bool TransformsForward() const override {
    return kind_ == CompressionKind::kFakeQuant;
  }
  // Fake-quantizes every weight matrix on its own current range.
  FcnModel ForwardModel(const FcnModel& latent) const override;
  // Masked gradients become 0; clustered gradients become the per-cluster
  // sum so members of a cluster receive the same update. Fake-quant
  // gradients pass straight through.
  void AdjustGradients(Gradients& gradients) const override;
  void Project(FcnModel& model) const override;

  // Throws kValidation unless `model` satisfies the constraint exactly.
  void Check(const FcnModel& model) const;
  bool IsSatisfiedBy(const FcnModel& model) const;

  // Updates centroids / ranges from a model that satisfies the structural
  // part of the constraint (after fine-tuning).
  void RefreshFrom(const FcnModel& model);

  friend bool operator==(const CompressionConstraint& a,
                         const CompressionConstraint& b);

 private:
  CompressionKind kind_ = CompressionKind::kPruneMask;
  std::vector<std::vector<uint8_t>> masks_;
  std::vector<LayerClusters> clusters_;
  std::vector<double> ranges_;
};

// `degree_tag` orders compression degree within one family:
//   pruning: sparsity in percent (60 < 70 < 80 < 90)
//   int8:    8
//   cluster: 256 - N (16 clusters < 8 < 4)
struct CompressedModel {
  FcnModel model;
  CompressionConstraint constraint;
  int degree_tag = 0;

  CompressionKind family() const { return constraint.kind(); }
  std::string Name() const;  // "prune60", "int8", "cluster8"
};

int ClusterDegreeTag(int n_clusters);

enum class PruneScope { kGlobal, kPerLayer };

// Zeroes the floor(sparsity * P) smallest-|w| weights (ties broken by
// position). kGlobal ranks across all weight matrices, kPerLayer within
// each matrix. Biases are never pruned.
CompressedModel PruneL1(const FcnModel& model, double sparsity,
                        PruneScope scope = PruneScope::kGlobal);

// Fine-tunes under the model's constraint (train-prune-finetune). With `dp`
// the fine-tuning uses DP-SGD gradients.
CompressedModel FinetuneCompressed(const CompressedModel& compressed,
                                   const TabularDataset& train_set,
                                   const TabularDataset& valid_set,
                                   const TrainConfig& config,
                                   const DpConfig* dp = nullptr);

enum class QuantMode { kPostTraining, kQuantAwareTraining };

struct QatSettings {
  const TabularDataset* train_set = nullptr;
  const TabularDataset* valid_set = nullptr;
  TrainConfig config;
  const DpConfig* dp = nullptr;
};

// Per-layer symmetric int8 quantization of the weight matrices. QAT runs
// fake-quant fine-tuning (straight-through gradients) before the final
// quantization and requires `qat` to name a training set.
CompressedModel QuantizeInt8(const FcnModel& model, QuantMode mode,
                             const QatSettings& qat = {});

struct KMeansResult {
  std::vector<double> centroids;
  std::vector<uint32_t> assignment;
  // Within-cluster sum of squares after each assignment step.
  std::vector<double> sse_history;
};

// Lloyd's algorithm on scalars with k-means++ seeding. k is reduced to the
// number of distinct values when fewer exist.
KMeansResult KMeans1D(std::span<const double> values, int k, uint64_t seed,
                      int max_iterations = 100, double tolerance = 1e-8);

// Replaces each weight matrix by its k-means centroids.
CompressedModel ClusterWeights(const FcnModel& model, int n_clusters,
                               uint64_t seed);

void SaveCompressedModel(const std::filesystem::path& path,
                         const CompressedModel& compressed);
CompressedModel LoadCompressedModel(const std::filesystem::path& path);

}  // namespace leakaudit

#endif  // LEAKAUDIT_COMPRESSION_H_
