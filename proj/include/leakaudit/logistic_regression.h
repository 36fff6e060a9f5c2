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

#ifndef LEAKAUDIT_LOGISTIC_REGRESSION_H_
#define LEAKAUDIT_LOGISTIC_REGRESSION_H_

#include <span>

#include "leakaudit/binary_io.h"
#include "leakaudit/feature_scaler.h"
#include "leakaudit/tensor.h"

namespace leakaudit {

struct LogisticRegressionParams {
  int iterations = 500;
  double l2_lambda = 1e-4;
};

// Binary logistic regression on standardized features, fitted by Nesterov
// accelerated full-batch gradient descent with step 1/L (L the gradient's
// Lipschitz bound).
class LogisticRegression {
 public:
  struct Objective {
    double loss = 0.0;  // mean BCE + 0.5 * l2 * |w|^2
    Vector grad_w;
    double grad_b = 0.0;
  };

  // Rows of x are samples already in model space (scaled); y in {0, 1}.
  static Objective Evaluate(const Vector& w, double b, const Matrix& x,
                            std::span<const int> y, double l2_lambda);

  static LogisticRegression Fit(const Matrix& x, std::span<const int> y,
                                const LogisticRegressionParams& params);
  // Unscaled model with the given parameters.
  static LogisticRegression FromParameters(Vector w, double b);

  double ScoreProba(std::span<const double> features) const;
  Vector ScoreBatch(const Matrix& x) const;
  int feature_dim() const { return static_cast<int>(w_.size()); }
  const Vector& weights() const { return w_; }
  double bias() const { return b_; }

  void Write(BinaryWriter& out) const;
  static LogisticRegression Read(BinaryReader& in);

 private:
  FeatureScaler scaler_;
  Vector w_;
  double b_ = 0.0;
};

}  // namespace leakaudit

#endif  // LEAKAUDIT_LOGISTIC_REGRESSION_H_
