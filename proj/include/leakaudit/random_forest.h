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

#ifndef LEAKAUDIT_RANDOM_FOREST_H_
#define LEAKAUDIT_RANDOM_FOREST_H_

#include <cstdint>
#include <span>
#include <vector>

#include "leakaudit/binary_io.h"
#include "leakaudit/tensor.h"

namespace leakaudit {

struct RandomForestParams {
  int num_trees = 100;
  int max_depth = 12;
  int min_samples_split = 2;
  bool bootstrap = true;
  int max_features = 0;  // 0: floor(sqrt(d)), at least 1
};

// Bagged CART trees with Gini splits. A tree's output is the member fraction
// of the training rows in the reached leaf; the forest averages trees.
class RandomForest {
 public:
  struct Node {
    int32_t feature = -1;  // -1 marks a leaf
    double threshold = 0.0;  // x[feature] <= threshold goes left
    int32_t left = -1;
    int32_t right = -1;
    double member_fraction = 0.0;
  };
  using Tree = std::vector<Node>;  // node 0 is the root

  static RandomForest Fit(const Matrix& x, std::span<const int> y,
                          const RandomForestParams& params, uint64_t seed);

  double ScoreProba(std::span<const double> features) const;
  Vector ScoreBatch(const Matrix& x) const;
  int feature_dim() const { return feature_dim_; }
  const std::vector<Tree>& trees() const { return trees_; }

  void Write(BinaryWriter& out) const;
  static RandomForest Read(BinaryReader& in);

 private:
  static double TreeScore(const Tree& tree, const double* x);

  int feature_dim_ = 0;
  std::vector<Tree> trees_;
};

}  // namespace leakaudit

#endif  // LEAKAUDIT_RANDOM_FOREST_H_
