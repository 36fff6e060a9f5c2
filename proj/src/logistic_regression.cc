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

#include "leakaudit/logistic_regression.h"

#include <algorithm>
#include <cmath>

#include "leakaudit/error.h"

namespace leakaudit {
namespace {

double Sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// log(1 + exp(z)) without overflow.
double Softplus(double z) {
  return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

// Largest eigenvalue of x^T x / n by power iteration.
double GramSpectralNorm(const Matrix& x) {
  const double n = static_cast<double>(x.rows());
  Vector v = Vector::Ones(x.cols()).normalized();
  double lambda = 0.0;
  for (int i = 0; i < 100; ++i) {
    Vector next = x.transpose() * (x * v) / n;
    const double norm = next.norm();
    if (norm == 0.0) return 0.0;
    v = next / norm;
    if (std::abs(norm - lambda) <= 1e-9 * norm) return norm;
    lambda = norm;
  }
  return lambda;
}

}  // namespace

LogisticRegression::Objective LogisticRegression::Evaluate(
    const Vector& w, double b, const Matrix& x, std::span<const int> y,
    double l2_lambda) {
  const double n = static_cast<double>(x.rows());
  const Vector z = (x * w).array() + b;
  Vector residual(z.size());
  Objective obj;
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    const int yi = y[static_cast<size_t>(i)];
    // BCE(y, sigmoid(z)) = softplus(z) - y z
    obj.loss += Softplus(z[i]) - yi * z[i];
    residual[i] = Sigmoid(z[i]) - yi;
  }
  obj.loss = obj.loss / n + 0.5 * l2_lambda * w.squaredNorm();
  obj.grad_w = x.transpose() * residual / n + l2_lambda * w;
  obj.grad_b = residual.sum() / n;
  return obj;
}

LogisticRegression LogisticRegression::Fit(
    const Matrix& x, std::span<const int> y,
    const LogisticRegressionParams& params) {
  LogisticRegression model;
  model.scaler_ = FeatureScaler::Fit(x);
  const Matrix xs = model.scaler_.Apply(x);
  // The Hessian is bounded by 0.25 * [X 1]^T [X 1] / n + l2; standardized
  // columns are centred so the bias direction adds at most 0.25.
  const double lipschitz =
      0.25 * (GramSpectralNorm(xs) + 1.0) + params.l2_lambda;
  const double step = 1.0 / lipschitz;

  Vector w = Vector::Zero(x.cols());
  double b = 0.0;
  Vector w_prev = w;
  double b_prev = b;
  for (int t = 1; t <= params.iterations; ++t) {
    const double beta = static_cast<double>(t - 1) / (t + 2);
    const Vector w_look = w + beta * (w - w_prev);
    const double b_look = b + beta * (b - b_prev);
    const Objective obj = Evaluate(w_look, b_look, xs, y, params.l2_lambda);
    w_prev = w;
    b_prev = b;
    w = w_look - step * obj.grad_w;
    b = b_look - step * obj.grad_b;
  }
  model.w_ = std::move(w);
  model.b_ = b;
  return model;
}

LogisticRegression LogisticRegression::FromParameters(Vector w, double b) {
  LogisticRegression model;
  model.scaler_ = FeatureScaler::Identity(w.size());
  model.w_ = std::move(w);
  model.b_ = b;
  return model;
}

double LogisticRegression::ScoreProba(std::span<const double> features) const {
  if (static_cast<Eigen::Index>(features.size()) != w_.size()) {
    throw Error(ErrorCode::kShape, "feature length differs from training");
  }
  return Sigmoid(scaler_.Apply(features).dot(w_) + b_);
}

Vector LogisticRegression::ScoreBatch(const Matrix& x) const {
  if (x.cols() != w_.size()) {
    throw Error(ErrorCode::kShape, "feature length differs from training");
  }
  const Vector z = (scaler_.Apply(x) * w_).array() + b_;
  return z.unaryExpr([](double v) { return Sigmoid(v); });
}

void LogisticRegression::Write(BinaryWriter& out) const {
  scaler_.Write(out);
  out.WriteVector(w_);
  out.WriteF64(b_);
}

LogisticRegression LogisticRegression::Read(BinaryReader& in) {
  LogisticRegression model;
  model.scaler_ = FeatureScaler::Read(in);
  model.w_ = in.ReadVector();
  model.b_ = in.ReadF64();
  return model;
}

}  // namespace leakaudit
