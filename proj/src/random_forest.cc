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

#include "leakaudit/random_forest.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "leakaudit/error.h"

namespace leakaudit {
namespace {

double Gini(double members, double total) {
  if (total <= 0) return 0.0;
  const double p = members / total;
  return 2.0 * p * (1.0 - p);
}

class TreeBuilder {
 public:
  TreeBuilder(const Matrix& x, std::span<const int> y,
              const RandomForestParams& params, int max_features,
              uint64_t seed)
      : x_(x), y_(y), params_(params), max_features_(max_features),
        rng_(seed) {
    features_.resize(static_cast<size_t>(x.cols()));
    std::iota(features_.begin(), features_.end(), 0);
  }

  RandomForest::Tree Build(std::vector<uint32_t> rows) {
    tree_.clear();
    Grow(rows, 0);
    return std::move(tree_);
  }

 private:
  struct Split {
    int feature = -1;
    double threshold = 0.0;
    double impurity = 0.0;
  };

  int32_t Grow(std::vector<uint32_t>& rows, int depth) {
    const auto id = static_cast<int32_t>(tree_.size());
    tree_.emplace_back();
    double members = 0;
    for (uint32_t r : rows) members += y_[r];
    const double total = static_cast<double>(rows.size());
    tree_[static_cast<size_t>(id)].member_fraction = members / total;

    const bool pure = members == 0 || members == total;
    if (pure || depth >= params_.max_depth ||
        rows.size() < static_cast<size_t>(params_.min_samples_split)) {
      return id;
    }
    const Split split = FindSplit(rows, members);
    if (split.feature < 0) return id;

    std::vector<uint32_t> left;
    std::vector<uint32_t> right;
    for (uint32_t r : rows) {
      (x_(r, split.feature) <= split.threshold ? left : right).push_back(r);
    }
    rows.clear();
    rows.shrink_to_fit();
    const int32_t l = Grow(left, depth + 1);
    const int32_t r = Grow(right, depth + 1);
    auto& node = tree_[static_cast<size_t>(id)];
    node.feature = split.feature;
    node.threshold = split.threshold;
    node.left = l;
    node.right = r;
    return id;
  }

  Split FindSplit(const std::vector<uint32_t>& rows, double members) {
    // Partial Fisher-Yates draws max_features distinct candidates.
    const size_t d = features_.size();
    const size_t draw = std::min(d, static_cast<size_t>(max_features_));
    for (size_t i = 0; i < draw; ++i) {
      std::uniform_int_distribution<size_t> pick(i, d - 1);
      std::swap(features_[i], features_[pick(rng_)]);
    }

    Split best;
    best.impurity = std::numeric_limits<double>::infinity();
    const double total = static_cast<double>(rows.size());
    std::vector<std::pair<double, int>> column(rows.size());
    for (size_t f = 0; f < draw; ++f) {
      const int feature = features_[f];
      for (size_t i = 0; i < rows.size(); ++i) {
        column[i] = {x_(rows[i], feature), y_[rows[i]]};
      }
      std::sort(column.begin(), column.end());
      double left_members = 0;
      for (size_t i = 0; i + 1 < column.size(); ++i) {
        left_members += column[i].second;
        if (column[i].first == column[i + 1].first) continue;
        const double nl = static_cast<double>(i + 1);
        const double nr = total - nl;
        const double impurity = (nl * Gini(left_members, nl) +
                                 nr * Gini(members - left_members, nr)) /
                                total;
        if (impurity < best.impurity) {
          best.impurity = impurity;
          best.feature = feature;
          double mid = 0.5 * (column[i].first + column[i + 1].first);
          // Adjacent doubles: the midpoint may round up to the right value.
          if (mid >= column[i + 1].first) mid = column[i].first;
          best.threshold = mid;
        }
      }
    }
    return best;
  }

  const Matrix& x_;
  std::span<const int> y_;
  const RandomForestParams& params_;
  int max_features_;
  std::mt19937_64 rng_;
  std::vector<int> features_;
  RandomForest::Tree tree_;
};

}  // namespace

RandomForest RandomForest::Fit(const Matrix& x, std::span<const int> y,
                               const RandomForestParams& params,
                               uint64_t seed) {
  if (params.num_trees < 1 || params.max_depth < 0 ||
      params.min_samples_split < 2) {
    throw Error(ErrorCode::kConfiguration, "invalid random forest settings");
  }
  const int d = static_cast<int>(x.cols());
  const int max_features =
      params.max_features > 0
          ? std::min(params.max_features, d)
          : std::max(1, static_cast<int>(std::floor(std::sqrt(d))));
  RandomForest forest;
  forest.feature_dim_ = d;
  const auto n = static_cast<uint32_t>(x.rows());
  for (int t = 0; t < params.num_trees; ++t) {
    const uint64_t tree_seed = DeriveSeed(seed, static_cast<uint64_t>(t));
    std::mt19937_64 bag_rng(DeriveSeed(tree_seed, 0xba9));
    std::vector<uint32_t> rows(n);
    if (params.bootstrap) {
      std::uniform_int_distribution<uint32_t> pick(0, n - 1);
      for (auto& r : rows) r = pick(bag_rng);
    } else {
      std::iota(rows.begin(), rows.end(), 0u);
    }
    TreeBuilder builder(x, y, params, max_features, tree_seed);
    forest.trees_.push_back(builder.Build(std::move(rows)));
  }
  return forest;
}

double RandomForest::TreeScore(const Tree& tree, const double* x) {
  size_t node = 0;
  while (tree[node].feature >= 0) {
    node = static_cast<size_t>(x[tree[node].feature] <= tree[node].threshold
                                   ? tree[node].left
                                   : tree[node].right);
  }
  return tree[node].member_fraction;
}

double RandomForest::ScoreProba(std::span<const double> features) const {
  if (static_cast<int>(features.size()) != feature_dim_) {
    throw Error(ErrorCode::kShape, "feature length differs from training");
  }
  double sum = 0.0;
  for (const auto& tree : trees_) sum += TreeScore(tree, features.data());
  return sum / static_cast<double>(trees_.size());
}

Vector RandomForest::ScoreBatch(const Matrix& x) const {
  if (x.cols() != feature_dim_) {
    throw Error(ErrorCode::kShape, "feature length differs from training");
  }
  Vector out(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    out[i] = ScoreProba(RowSpan(x, i));
  }
  return out;
}

void RandomForest::Write(BinaryWriter& out) const {
  out.WriteI32(feature_dim_);
  out.WriteU32(static_cast<uint32_t>(trees_.size()));
  for (const auto& tree : trees_) {
    out.WriteU32(static_cast<uint32_t>(tree.size()));
    for (const auto& node : tree) {
      out.WriteI32(node.feature);
      out.WriteF64(node.threshold);
      out.WriteI32(node.left);
      out.WriteI32(node.right);
      out.WriteF64(node.member_fraction);
    }
  }
}

RandomForest RandomForest::Read(BinaryReader& in) {
  RandomForest forest;
  forest.feature_dim_ = in.ReadI32();
  forest.trees_.resize(in.ReadU32());
  for (auto& tree : forest.trees_) {
    tree.resize(in.ReadU32());
    for (auto& node : tree) {
      node.feature = in.ReadI32();
      node.threshold = in.ReadF64();
      node.left = in.ReadI32();
      node.right = in.ReadI32();
      node.member_fraction = in.ReadF64();
    }
  }
  return forest;
}

}  // namespace leakaudit
