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

#ifndef LEAKAUDIT_MLP_CLASSIFIER_H_
#define LEAKAUDIT_MLP_CLASSIFIER_H_

#include <cstdint>
#include <span>

#include "leakaudit/binary_io.h"
#include "leakaudit/feature_scaler.h"
#include "leakaudit/tensor.h"

namespace leakaudit {

struct MlpParams {
  int hidden = 64;
  int epochs = 150;
  int batch_size = 32;
  double learning_rate = 1e-3;  // Adam
  double l2_lambda = 1e-4;
  // > 0 holds out this stratified fraction of the rows and keeps the epoch
  // with the lowest held-out cross-entropy; training stops after
  // `patience` epochs without improvement.
  double validation_fraction = 0.2;
  int patience = 10;
  // Inputs are used as given unless set (posteriors and one-hot labels are
  // already on a unit scale).
  bool standardize = false;
};

// One ReLU hidden layer and a sigmoid output, trained on binary
// cross-entropy with Adam.
class MlpClassifier {
 public:
  struct Parameters {
    Matrix w1;  // hidden x d
    Vector b1;
    Vector w2;  // hidden
    double b2 = 0.0;
  };

  // Mean BCE + 0.5 * l2 * (|w1|^2 + |w2|^2) on already-scaled rows; fills
  // `grad` (same shapes as `params`) when non-null.
  static double LossAndGradient(const Parameters& params, const Matrix& x,
                                std::span<const int> y, double l2_lambda,
                                Parameters* grad);

  static MlpClassifier Fit(const Matrix& x, std::span<const int> y,
                           const MlpParams& params, uint64_t seed);

  double ScoreProba(std::span<const double> features) const;
  Vector ScoreBatch(const Matrix& x) const;
  int feature_dim() const { return static_cast<int>(params_.w1.cols()); }
  const Parameters& parameters() const { return params_; }

  void Write(BinaryWriter& out) const;
  static MlpClassifier Read(BinaryReader& in);

 private:
  FeatureScaler scaler_;
  Parameters params_;
};

}  // namespace leakaudit

#endif  // LEAKAUDIT_MLP_CLASSIFIER_H_
