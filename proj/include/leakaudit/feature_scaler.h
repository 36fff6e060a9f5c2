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

#ifndef LEAKAUDIT_FEATURE_SCALER_H_
#define LEAKAUDIT_FEATURE_SCALER_H_

#include <cmath>
#include <span>

#include "leakaudit/binary_io.h"
#include "leakaudit/tensor.h"

namespace leakaudit {

// Per-feature standardization fitted on training rows. Constant features
// keep unit scale so they map to 0.
struct FeatureScaler {
  Vector mean;
  Vector inv_std;

  static FeatureScaler Fit(const Matrix& x) {
    FeatureScaler s;
    const double n = static_cast<double>(x.rows());
    s.mean = x.colwise().mean().transpose();
    s.inv_std.resize(x.cols());
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
      const double var = (x.col(c).array() - s.mean[c]).square().sum() / n;
      s.inv_std[c] = var > 1e-24 ? 1.0 / std::sqrt(var) : 1.0;
    }
    return s;
  }

  static FeatureScaler Identity(Eigen::Index dim) {
    return {Vector::Zero(dim), Vector::Ones(dim)};
  }

  Matrix Apply(const Matrix& x) const {
    Matrix out = x;
    out.rowwise() -= mean.transpose();
    out.array().rowwise() *= inv_std.transpose().array();
    return out;
  }

  Vector Apply(std::span<const double> x) const {
    Vector out(static_cast<Eigen::Index>(x.size()));
    for (Eigen::Index c = 0; c < out.size(); ++c) {
      out[c] = (x[static_cast<size_t>(c)] - mean[c]) * inv_std[c];
    }
    return out;
  }

  void Write(BinaryWriter& out) const {
    out.WriteVector(mean);
    out.WriteVector(inv_std);
  }
  static FeatureScaler Read(BinaryReader& in) {
    FeatureScaler s;
    s.mean = in.ReadVector();
    s.inv_std = in.ReadVector();
    return s;
  }
};

}  // namespace leakaudit

#endif  // LEAKAUDIT_FEATURE_SCALER_H_
