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

#ifndef LEAKAUDIT_DATA_H_
#define LEAKAUDIT_DATA_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "leakaudit/tensor.h"

namespace leakaudit {

// A labeled tabular dataset. Rows of `features` are samples.
struct TabularDataset {
  Matrix features;
  std::vector<int> labels;
  int class_count = 0;
  std::string provenance;

  size_t size() const { return labels.size(); }
  int feature_dim() const { return static_cast<int>(features.cols()); }

  // Throws kSchema / kInput / kShape on a broken invariant.
  void Validate() const;

  // Rows in the order given by `indices`.
  TabularDataset Subset(std::span<const size_t> indices) const;
};

struct CsvSchema {
  bool has_header = false;
  // Index of the label column; negative values count from the end, so the
  // default -1 is the final column.
  int label_column = -1;
  // 0 infers the class count as max(label) + 1.
  int class_count = 0;
  char delimiter = ',';
};

// Row order is preserved. Malformed rows raise kParse naming the 1-based
// line number; labels outside [0, class_count) raise kSchema.
TabularDataset LoadCsv(const std::filesystem::path& path,
                       const CsvSchema& schema);

// Writes features then the label as the final column, no header.
void WriteCsv(const std::filesystem::path& path, const TabularDataset& data);

struct SynthParams {
  size_t samples = 1000;
  int features = 32;
  int classes = 10;
  // Standard deviation of the per-sample noise around each class centre.
  // Class centres are drawn from N(0, 1) per dimension.
  double cluster_spread = 1.0;
  uint64_t seed = 0;
};

// Gaussian class clusters; labels cycle through 0..C-1 before shuffling so
// every class is present whenever samples >= classes.
TabularDataset SynthGenerate(const SynthParams& params);

struct SplitSizes {
  size_t victim_train = 0;
  size_t victim_test = 0;
  size_t shadow_train = 0;
  size_t shadow_test = 0;
  // Optional early-stopping sets; disjoint from everything else.
  size_t victim_valid = 0;
  size_t shadow_valid = 0;

  size_t total() const {
    return victim_train + victim_test + shadow_train + shadow_test +
           victim_valid + shadow_valid;
  }
};

// Disjoint index sets into one dataset. Members of the victim are
// victim_train, non-members victim_test; likewise for the shadow side.
struct SplitPlan {
  std::vector<size_t> victim_train;
  std::vector<size_t> victim_test;
  std::vector<size_t> shadow_train;
  std::vector<size_t> shadow_test;
  std::vector<size_t> victim_valid;
  std::vector<size_t> shadow_valid;
  uint64_t seed = 0;

  // Checks pairwise disjointness and bounds against `dataset_size`.
  void Validate(size_t dataset_size) const;
};

// Member and non-member evaluation sets must be the same size on each side;
// violations and requests larger than the dataset raise kSize.
SplitPlan MakeSplit(const TabularDataset& dataset, const SplitSizes& sizes,
                    uint64_t seed);

// D_f (used for fine-tuning compressed models) and D_nf (the rest of the
// victim training set).
struct FinetunePlan {
  double fraction = 1.0;
  std::vector<size_t> finetune;
  std::vector<size_t> held_out;
  uint64_t seed = 0;
};

// fraction must lie in (0, 1]; |D_f| = max(1, round(fraction * |train|)).
FinetunePlan MakeFinetunePlan(std::span<const size_t> victim_train,
                              double fraction, uint64_t seed);

}  // namespace leakaudit

#endif  // LEAKAUDIT_DATA_H_
