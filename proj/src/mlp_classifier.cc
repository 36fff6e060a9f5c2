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

#include "leakaudit/mlp_classifier.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "leakaudit/error.h"

namespace leakaudit {
namespace {

double Sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double Softplus(double z) {
  return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

Vector Logit(const MlpClassifier::Parameters& p, const Matrix& x) {
  Matrix h = x * p.w1.transpose();
  h.rowwise() += p.b1.transpose();
  return (h.cwiseMax(0.0) * p.w2).array() + p.b2;
}

struct Adam {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  int64_t t = 0;
  MlpClassifier::Parameters m, v;

  explicit Adam(const MlpClassifier::Parameters& like) {
    m.w1 = Matrix::Zero(like.w1.rows(), like.w1.cols());
    m.b1 = Vector::Zero(like.b1.size());
    m.w2 = Vector::Zero(like.w2.size());
    v = m;
  }

  template <typename P, typename G, typename M>
  void StepArray(P& param, const G& grad, M& mom, M& var, double lr,
                 double c1, double c2) {
    mom.array() = beta1 * mom.array() + (1 - beta1) * grad.array();
    var.array() = beta2 * var.array() + (1 - beta2) * grad.array().square();
    param.array() -= lr * (mom.array() / c1) /
                     ((var.array() / c2).sqrt() + eps);
  }

  void Step(MlpClassifier::Parameters& p, const MlpClassifier::Parameters& g,
            double lr) {
    ++t;
    const double c1 = 1 - std::pow(beta1, static_cast<double>(t));
    const double c2 = 1 - std::pow(beta2, static_cast<double>(t));
    StepArray(p.w1, g.w1, m.w1, v.w1, lr, c1, c2);
    StepArray(p.b1, g.b1, m.b1, v.b1, lr, c1, c2);
    StepArray(p.w2, g.w2, m.w2, v.w2, lr, c1, c2);
    m.b2 = beta1 * m.b2 + (1 - beta1) * g.b2;
    v.b2 = beta2 * v.b2 + (1 - beta2) * g.b2 * g.b2;
    p.b2 -= lr * (m.b2 / c1) / (std::sqrt(v.b2 / c2) + eps);
  }
};

}  // namespace

double MlpClassifier::LossAndGradient(const Parameters& params,
                                      const Matrix& x, std::span<const int> y,
                                      double l2_lambda, Parameters* grad) {
  const double n = static_cast<double>(x.rows());
  Matrix pre = x * params.w1.transpose();
  pre.rowwise() += params.b1.transpose();
  const Matrix hidden = pre.cwiseMax(0.0);
  const Vector z = (hidden * params.w2).array() + params.b2;

  double loss = 0.0;
  Vector residual(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    const int yi = y[static_cast<size_t>(i)];
    loss += Softplus(z[i]) - yi * z[i];
    residual[i] = (Sigmoid(z[i]) - yi) / n;
  }
  loss = loss / n + 0.5 * l2_lambda *
                        (params.w1.squaredNorm() + params.w2.squaredNorm());
  if (grad != nullptr) {
    grad->w2 = hidden.transpose() * residual + l2_lambda * params.w2;
    grad->b2 = residual.sum();
    Matrix back = residual * params.w2.transpose();
    back.array() *= (pre.array() > 0.0).cast<double>();
    grad->w1 = back.transpose() * x + l2_lambda * params.w1;
    grad->b1 = back.colwise().sum().transpose();
  }
  return loss;
}

MlpClassifier MlpClassifier::Fit(const Matrix& x, std::span<const int> y,
                                 const MlpParams& params, uint64_t seed) {
  if (params.hidden < 1 || params.epochs < 0 || params.batch_size < 1 ||
      !(params.learning_rate > 0.0) || !(params.validation_fraction >= 0.0) ||
      !(params.validation_fraction < 1.0) || params.patience < 1) {
    throw Error(ErrorCode::kConfiguration, "invalid MLP settings");
  }
  MlpClassifier model;
  model.scaler_ = params.standardize ? FeatureScaler::Fit(x)
                                    : FeatureScaler::Identity(x.cols());
  const Matrix xs = model.scaler_.Apply(x);
  const Eigen::Index d = x.cols();

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> init1(0.0, std::sqrt(2.0 / d));
  std::normal_distribution<double> init2(0.0, std::sqrt(1.0 / params.hidden));
  Parameters& p = model.params_;
  p.w1.resize(params.hidden, d);
  for (Eigen::Index i = 0; i < p.w1.size(); ++i) p.w1.data()[i] = init1(rng);
  p.b1 = Vector::Zero(params.hidden);
  p.w2.resize(params.hidden);
  for (Eigen::Index i = 0; i < p.w2.size(); ++i) p.w2[i] = init2(rng);
  p.b2 = 0.0;

  std::vector<size_t> order;
  std::vector<size_t> held_out;
  if (params.validation_fraction > 0.0) {
    for (int label : {0, 1}) {
      std::vector<size_t> rows;
      for (size_t i = 0; i < y.size(); ++i) {
        if (y[i] == label) rows.push_back(i);
      }
      std::shuffle(rows.begin(), rows.end(), rng);
      const auto take = static_cast<size_t>(
          std::floor(params.validation_fraction * rows.size()));
      held_out.insert(held_out.end(), rows.begin(), rows.begin() + take);
      order.insert(order.end(), rows.begin() + take, rows.end());
    }
    std::sort(order.begin(), order.end());
    std::sort(held_out.begin(), held_out.end());
  } else {
    order.resize(static_cast<size_t>(x.rows()));
    std::iota(order.begin(), order.end(), size_t{0});
  }
  Matrix x_held(static_cast<Eigen::Index>(held_out.size()), d);
  std::vector<int> y_held;
  for (size_t i = 0; i < held_out.size(); ++i) {
    x_held.row(static_cast<Eigen::Index>(i)) =
        xs.row(static_cast<Eigen::Index>(held_out[i]));
    y_held.push_back(y[held_out[i]]);
  }
  Parameters best = p;
  double best_loss = std::numeric_limits<double>::infinity();
  int stale = 0;

  Adam adam(p);
  const auto batch = static_cast<size_t>(params.batch_size);
  Parameters grad;
  for (int epoch = 0; epoch < params.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (size_t start = 0; start < order.size(); start += batch) {
      const size_t end = std::min(order.size(), start + batch);
      Matrix xb(static_cast<Eigen::Index>(end - start), d);
      std::vector<int> yb(end - start);
      for (size_t i = start; i < end; ++i) {
        xb.row(static_cast<Eigen::Index>(i - start)) =
            xs.row(static_cast<Eigen::Index>(order[i]));
        yb[i - start] = y[order[i]];
      }
      LossAndGradient(p, xb, yb, params.l2_lambda, &grad);
      adam.Step(p, grad, params.learning_rate);
    }
    if (!held_out.empty()) {
      const double loss = LossAndGradient(p, x_held, y_held, 0.0, nullptr);
      if (loss < best_loss) {
        best_loss = loss;
        best = p;
        stale = 0;
      } else if (++stale >= params.patience) {
        break;
      }
    }
  }
  if (!held_out.empty()) p = best;
  return model;
}

double MlpClassifier::ScoreProba(std::span<const double> features) const {
  if (static_cast<int>(features.size()) != feature_dim()) {
    throw Error(ErrorCode::kShape, "feature length differs from training");
  }
  const Vector row = scaler_.Apply(features);
  const Matrix x = row.transpose();
  return Sigmoid(Logit(params_, x)[0]);
}

Vector MlpClassifier::ScoreBatch(const Matrix& x) const {
  if (x.cols() != feature_dim()) {
    throw Error(ErrorCode::kShape, "feature length differs from training");
  }
  return Logit(params_, scaler_.Apply(x)).unaryExpr([](double v) {
    return Sigmoid(v);
  });
}

void MlpClassifier::Write(BinaryWriter& out) const {
  scaler_.Write(out);
  out.WriteMatrix(params_.w1);
  out.WriteVector(params_.b1);
  out.WriteVector(params_.w2);
  out.WriteF64(params_.b2);
}

MlpClassifier MlpClassifier::Read(BinaryReader& in) {
  MlpClassifier model;
  model.scaler_ = FeatureScaler::Read(in);
  model.params_.w1 = in.ReadMatrix();
  model.params_.b1 = in.ReadVector();
  model.params_.w2 = in.ReadVector();
  model.params_.b2 = in.ReadF64();
  return model;
}

}  // namespace leakaudit
