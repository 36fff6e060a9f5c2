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

#ifndef LEAKAUDIT_META_CLASSIFIER_H_
#define LEAKAUDIT_META_CLASSIFIER_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "leakaudit/logistic_regression.h"
#include "leakaudit/mlp_classifier.h"
#include "leakaudit/random_forest.h"
#include "leakaudit/tensor.h"

namespace leakaudit {

// One row of attack training data: features derived from model outputs and
// the membership label (1 = member).
struct MetaRecord {
  std::vector<double> features;
  int membership = 0;
};

enum class MetaClassifierKind { kLogisticRegression, kRandomForest, kMlp };

std::string_view MetaClassifierKindName(MetaClassifierKind kind);
// Accepts "lr", "rf", "mlp".
MetaClassifierKind ParseMetaClassifierKind(std::string_view name);

struct MetaHyperparameters {
  LogisticRegressionParams lr;
  RandomForestParams rf;
  MlpParams mlp;
};

// Row-stacked records; throws kShape on ragged features, kInput on
// non-finite values or labels outside {0, 1}.
struct MetaDataset {
  Matrix features;
  std::vector<int> membership;

  static MetaDataset FromRecords(std::span<const MetaRecord> records);
};

// Binary membership classifier. Scores are probabilities in [0, 1]; a
// score of exactly 0.5 predicts member.
class MetaClassifier {
 public:
  static constexpr double kDecisionThreshold = 0.5;

  // Throws kDegenerateData unless both labels are present.
  static MetaClassifier Fit(MetaClassifierKind kind,
                            std::span<const MetaRecord> records,
                            const MetaHyperparameters& hyper, uint64_t seed);
  static MetaClassifier Fit(MetaClassifierKind kind, const MetaDataset& data,
                            const MetaHyperparameters& hyper, uint64_t seed);

  explicit MetaClassifier(LogisticRegression lr) : impl_(std::move(lr)) {}
  explicit MetaClassifier(RandomForest rf) : impl_(std::move(rf)) {}
  explicit MetaClassifier(MlpClassifier mlp) : impl_(std::move(mlp)) {}

  MetaClassifierKind kind() const;
  int feature_dim() const;
  uint64_t seed() const { return seed_; }

  double ScoreProba(std::span<const double> features) const;
  Vector ScoreBatch(const Matrix& features) const;
  bool Predict(std::span<const double> features) const {
    return ScoreProba(features) >= kDecisionThreshold;
  }

  const LogisticRegression* AsLogisticRegression() const {
    return std::get_if<LogisticRegression>(&impl_);
  }
  const RandomForest* AsRandomForest() const {
    return std::get_if<RandomForest>(&impl_);
  }
  const MlpClassifier* AsMlp() const {
    return std::get_if<MlpClassifier>(&impl_);
  }

  void Write(BinaryWriter& out) const;
  static MetaClassifier Read(BinaryReader& in);
  void Save(const std::filesystem::path& path) const;
  static MetaClassifier Load(const std::filesystem::path& path);

 private:
  std::variant<LogisticRegression, RandomForest, MlpClassifier> impl_;
  uint64_t seed_ = 0;
};

}  // namespace leakaudit

#endif  // LEAKAUDIT_META_CLASSIFIER_H_
