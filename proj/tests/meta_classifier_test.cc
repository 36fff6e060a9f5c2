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

#include "leakaudit/meta_classifier.h"

#include <cmath>
#include <filesystem>
#include <functional>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "leakaudit/error.h"
#include "oracles.h"

namespace leakaudit {
namespace {

struct Labeled {
  Matrix x;
  std::vector<int> y;
};

Labeled OneDimensional() {
  Labeled d;
  d.x.resize(20, 1);
  for (int i = 0; i < 20; ++i) {
    d.x(i, 0) = i % 2 == 0 ? 1.0 : -1.0;
    d.y.push_back(i % 2 == 0 ? 1 : 0);
  }
  return d;
}

Labeled Gaussian(int n, int dim, double shift, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  Labeled d;
  d.x.resize(n, dim);
  for (int i = 0; i < n; ++i) {
    const int y = i % 2;
    for (int c = 0; c < dim; ++c) d.x(i, c) = g(rng) + (y ? shift : -shift);
    d.y.push_back(y);
  }
  return d;
}

Labeled Xor() {
  Labeled d;
  d.x.resize(4, 2);
  d.x << 0, 0, 0, 1, 1, 0, 1, 1;
  d.y = {0, 1, 1, 0};
  return d;
}

double TrainAccuracy(const MetaClassifier& clf, const Labeled& d) {
  int correct = 0;
  for (Eigen::Index i = 0; i < d.x.rows(); ++i) {
    correct += clf.Predict(RowSpan(d.x, i)) == (d.y[i] == 1);
  }
  return static_cast<double>(correct) / d.x.rows();
}

MetaDataset AsDataset(const Labeled& d) { return {d.x, d.y}; }

const MetaClassifierKind kAllKinds[] = {
    MetaClassifierKind::kLogisticRegression,
    MetaClassifierKind::kRandomForest, MetaClassifierKind::kMlp};

TEST(MetaClassifierTest, SeparableOneDimensional) {
  const Labeled d = OneDimensional();
  for (MetaClassifierKind kind : kAllKinds) {
    const MetaClassifier clf =
        MetaClassifier::Fit(kind, AsDataset(d), MetaHyperparameters{}, 3);
    EXPECT_DOUBLE_EQ(TrainAccuracy(clf, d), 1.0)
        << MetaClassifierKindName(kind);
  }
}

TEST(MetaClassifierTest, SingleClassIsDegenerateData) {
  Labeled d = OneDimensional();
  std::fill(d.y.begin(), d.y.end(), 1);
  for (MetaClassifierKind kind : kAllKinds) {
    try {
      MetaClassifier::Fit(kind, AsDataset(d), MetaHyperparameters{}, 1);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kDegenerateData);
    }
  }
}

TEST(MetaClassifierTest, ScoresStayInUnitInterval) {
  const Labeled d = Gaussian(200, 4, 0.4, 1);
  const Labeled probe = Gaussian(100, 4, 20.0, 2);
  for (MetaClassifierKind kind : kAllKinds) {
    const MetaClassifier clf =
        MetaClassifier::Fit(kind, AsDataset(d), MetaHyperparameters{}, 4);
    const Vector s = clf.ScoreBatch(probe.x);
    EXPECT_GE(s.minCoeff(), 0.0);
    EXPECT_LE(s.maxCoeff(), 1.0);
    for (Eigen::Index i = 0; i < probe.x.rows(); ++i) {
      EXPECT_NEAR(clf.ScoreProba(RowSpan(probe.x, i)), s[i], 1e-12);
    }
  }
}

TEST(MetaClassifierTest, SeededRefitIsIdentical) {
  const Labeled d = Gaussian(120, 3, 0.5, 5);
  for (MetaClassifierKind kind : kAllKinds) {
    const MetaHyperparameters hyper;
    const MetaClassifier a = MetaClassifier::Fit(kind, AsDataset(d), hyper, 9);
    const MetaClassifier b = MetaClassifier::Fit(kind, AsDataset(d), hyper, 9);
    BinaryWriter wa;
    BinaryWriter wb;
    a.Write(wa);
    b.Write(wb);
    EXPECT_EQ(wa.buffer(), wb.buffer()) << MetaClassifierKindName(kind);
  }
}

TEST(MetaClassifierTest, CheckpointRoundTrip) {
  const Labeled d = Gaussian(80, 3, 0.5, 6);
  const auto path =
      std::filesystem::temp_directory_path() / "leakaudit_meta_test.ckpt";
  for (MetaClassifierKind kind : kAllKinds) {
    const MetaClassifier clf =
        MetaClassifier::Fit(kind, AsDataset(d), MetaHyperparameters{}, 2);
    clf.Save(path);
    const MetaClassifier back = MetaClassifier::Load(path);
    EXPECT_EQ(back.kind(), kind);
    EXPECT_EQ(back.seed(), clf.seed());
    EXPECT_EQ(back.ScoreBatch(d.x), clf.ScoreBatch(d.x));
  }
  std::filesystem::remove(path);
}

TEST(MetaClassifierTest, LengthMismatchIsShapeError) {
  const Labeled d = OneDimensional();
  for (MetaClassifierKind kind : kAllKinds) {
    const MetaClassifier clf =
        MetaClassifier::Fit(kind, AsDataset(d), MetaHyperparameters{}, 1);
    const std::vector<double> wrong{1.0, 2.0};
    try {
      clf.ScoreProba(wrong);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kShape);
    }
  }
}

TEST(MetaClassifierTest, ParsesKindNames) {
  for (MetaClassifierKind kind : kAllKinds) {
    EXPECT_EQ(ParseMetaClassifierKind(MetaClassifierKindName(kind)), kind);
  }
  EXPECT_THROW(ParseMetaClassifierKind("dt"), Error);
}

TEST(MetaClassifierTest, FromRecords) {
  const std::vector<MetaRecord> records{{{0.1, 0.2}, 1}, {{0.3, 0.4}, 0}};
  const MetaDataset d = MetaDataset::FromRecords(records);
  EXPECT_EQ(d.features.rows(), 2);
  EXPECT_EQ(d.features(1, 0), 0.3);
  EXPECT_EQ(d.membership, (std::vector<int>{1, 0}));
}

TEST(LogisticRegressionTest, ZeroWeightsScoreHalfAndTieIsMember) {
  const MetaClassifier clf(
      LogisticRegression::FromParameters(Vector::Zero(3), 0.0));
  const std::vector<double> x{5.0, -2.0, 100.0};
  EXPECT_DOUBLE_EQ(clf.ScoreProba(x), 0.5);
  EXPECT_TRUE(clf.Predict(x));
}

TEST(LogisticRegressionTest, DuplicatePointWithBothLabelsScoresHalf) {
  Labeled d = OneDimensional();
  d.x.conservativeResize(22, 1);
  d.x(20, 0) = 0.0;
  d.x(21, 0) = 0.0;
  d.y.push_back(1);
  d.y.push_back(0);
  const LogisticRegression lr =
      LogisticRegression::Fit(d.x, d.y, LogisticRegressionParams{});
  const std::vector<double> origin{0.0};
  EXPECT_NEAR(lr.ScoreProba(origin), 0.5, 1e-3);
}

TEST(LogisticRegressionTest, GradientMatchesCentralDifferences) {
  const Labeled d = Gaussian(15, 4, 0.3, 7);
  Vector w(4);
  w << 0.3, -0.2, 0.5, 0.1;
  double b = -0.4;
  const double l2 = 0.05;
  const auto obj = LogisticRegression::Evaluate(w, b, d.x, d.y, l2);
  auto loss = [&] {
    return LogisticRegression::Evaluate(w, b, d.x, d.y, l2).loss;
  };
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    const double numeric = oracle::CentralDifference(loss, w[i], 1e-4);
    EXPECT_LT(oracle::RelativeError(obj.grad_w[i], numeric), 1e-4);
  }
  EXPECT_LT(oracle::RelativeError(obj.grad_b,
                                  oracle::CentralDifference(loss, b, 1e-4)),
            1e-4);
}

TEST(RandomForestTest, DepthOneStumpCannotSolveXor) {
  const Labeled d = Xor();
  RandomForestParams params;
  params.num_trees = 1;
  params.max_depth = 1;
  params.bootstrap = false;
  params.max_features = 2;
  for (uint64_t seed = 0; seed < 10; ++seed) {
    const RandomForest rf = RandomForest::Fit(d.x, d.y, params, seed);
    int correct = 0;
    for (Eigen::Index i = 0; i < 4; ++i) {
      correct += (rf.ScoreProba(RowSpan(d.x, i)) >= 0.5) == (d.y[i] == 1);
    }
    EXPECT_LE(correct, 3);
  }
}

TEST(RandomForestTest, UnanimousMemberVoteScoresOne) {
  const Labeled d = OneDimensional();
  RandomForestParams params;
  params.num_trees = 7;
  const RandomForest rf = RandomForest::Fit(d.x, d.y, params, 3);
  const std::vector<double> deep_member{5.0};
  const std::vector<double> deep_nonmember{-5.0};
  EXPECT_DOUBLE_EQ(rf.ScoreProba(deep_member), 1.0);
  EXPECT_DOUBLE_EQ(rf.ScoreProba(deep_nonmember), 0.0);
}

TEST(RandomForestTest, RespectsDepthLimit) {
  const Labeled d = Gaussian(200, 3, 0.1, 8);
  RandomForestParams params;
  params.num_trees = 5;
  params.max_depth = 3;
  const RandomForest rf = RandomForest::Fit(d.x, d.y, params, 1);
  for (const auto& tree : rf.trees()) {
    std::function<int(int)> depth = [&](int node) -> int {
      const auto& n = tree[static_cast<size_t>(node)];
      if (n.feature < 0) return 0;
      return 1 + std::max(depth(n.left), depth(n.right));
    };
    EXPECT_LE(depth(0), 3);
  }
}

TEST(MlpTest, GradientMatchesCentralDifferences) {
  const Labeled d = Gaussian(12, 3, 0.3, 9);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g(0.0, 0.5);
  MlpClassifier::Parameters p;
  p.w1.resize(4, 3);
  p.b1.resize(4);
  p.w2.resize(4);
  for (Eigen::Index i = 0; i < p.w1.size(); ++i) p.w1.data()[i] = g(rng);
  for (Eigen::Index i = 0; i < 4; ++i) {
    p.b1[i] = g(rng) + 0.3;
    p.w2[i] = g(rng);
  }
  p.b2 = 0.1;
  const double l2 = 0.02;
  MlpClassifier::Parameters grad;
  MlpClassifier::LossAndGradient(p, d.x, d.y, l2, &grad);
  auto loss = [&] {
    return MlpClassifier::LossAndGradient(p, d.x, d.y, l2, nullptr);
  };
  double worst = 0.0;
  for (Eigen::Index i = 0; i < p.w1.size(); ++i) {
    worst = std::max(worst, oracle::RelativeError(
                                grad.w1.data()[i],
                                oracle::CentralDifference(
                                    loss, p.w1.data()[i], 1e-4)));
  }
  for (Eigen::Index i = 0; i < 4; ++i) {
    worst = std::max(worst,
                     oracle::RelativeError(
                         grad.b1[i], oracle::CentralDifference(loss, p.b1[i],
                                                               1e-4)));
    worst = std::max(worst,
                     oracle::RelativeError(
                         grad.w2[i], oracle::CentralDifference(loss, p.w2[i],
                                                               1e-4)));
  }
  worst = std::max(worst, oracle::RelativeError(
                              grad.b2,
                              oracle::CentralDifference(loss, p.b2, 1e-4)));
  EXPECT_LT(worst, 1e-4);
}

TEST(MlpTest, LearnsXorWithoutValidationSplit) {
  Labeled d;
  d.x.resize(40, 2);
  for (int i = 0; i < 40; ++i) {
    const Labeled x = Xor();
    d.x.row(i) = x.x.row(i % 4);
    d.y.push_back(x.y[i % 4]);
  }
  MlpParams params;
  params.hidden = 16;
  params.epochs = 400;
  params.learning_rate = 0.01;
  params.validation_fraction = 0.0;
  params.l2_lambda = 0.0;
  const MetaClassifier clf(MlpClassifier::Fit(d.x, d.y, params, 5));
  EXPECT_DOUBLE_EQ(TrainAccuracy(clf, d), 1.0);
}

TEST(MlpTest, RejectsInvalidSettings) {
  const Labeled d = OneDimensional();
  MlpParams params;
  params.validation_fraction = 1.0;
  EXPECT_THROW(MlpClassifier::Fit(d.x, d.y, params, 1), Error);
  params = MlpParams{};
  params.hidden = 0;
  EXPECT_THROW(MlpClassifier::Fit(d.x, d.y, params, 1), Error);
}

}  // namespace
}  // namespace leakaudit
