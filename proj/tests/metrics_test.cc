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

#include "leakaudit/metrics.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <string>

#include <gtest/gtest.h>

#include "leakaudit/error.h"
#include "oracles.h"

namespace leakaudit {
namespace {

AttackScoreSet Scores(std::vector<double> m, std::vector<double> n) {
  return {std::move(m), std::move(n)};
}

TEST(BalancedAccuracyTest, PerfectSeparationIsOne) {
  EXPECT_DOUBLE_EQ(BalancedAccuracy(Scores({0.9, 0.8}, {0.1, 0.2})), 1.0);
}

TEST(BalancedAccuracyTest, TiesAtThresholdCountAsMember) {
  EXPECT_DOUBLE_EQ(BalancedAccuracy(Scores({0.5, 0.5}, {0.5, 0.5})), 0.5);
  EXPECT_DOUBLE_EQ(BalancedAccuracy(Scores({0.5}, {0.49})), 1.0);
}

TEST(BalancedAccuracyTest, MatchesHandConfusionMatrix) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const auto m = oracle::RandomScores(rng, 50, trial % 2 == 0);
    const auto n = oracle::RandomScores(rng, 50, trial % 2 == 0);
    const double expected =
        oracle::ConfusionBalancedAccuracy(oracle::CountConfusion(m, n, 0.5));
    EXPECT_DOUBLE_EQ(BalancedAccuracy(Scores(m, n)), expected);
  }
}

TEST(BalancedAccuracyTest, FromPredictions) {
  const std::vector<uint8_t> member{1, 1, 0, 1};
  const std::vector<uint8_t> nonmember{0, 1};
  EXPECT_DOUBLE_EQ(BalancedAccuracyFromPredictions(member, nonmember),
                   0.5 * (0.75 + 0.5));
}

TEST(BalancedAccuracyTest, RejectsEmptyAndNonFinite) {
  try {
    BalancedAccuracy(Scores({}, {0.1}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kSize);
  }
  try {
    BalancedAccuracy(Scores({std::nan("")}, {0.1}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInput);
  }
}

TEST(RocAucTest, ConcordantPairs) {
  EXPECT_DOUBLE_EQ(RocAuc(Scores({0.9, 0.8}, {0.1, 0.7})), 1.0);
}

TEST(RocAucTest, IdenticalMultisetsGiveHalf) {
  EXPECT_DOUBLE_EQ(RocAuc(Scores({0.1, 0.4, 0.4, 0.9}, {0.9, 0.4, 0.1, 0.4})),
                   0.5);
}

TEST(RocAucTest, SwappingPopulationsComplements) {
  std::mt19937_64 rng(11);
  const auto m = oracle::RandomScores(rng, 23, true);
  const auto n = oracle::RandomScores(rng, 31, true);
  EXPECT_NEAR(RocAuc(Scores(n, m)), 1.0 - RocAuc(Scores(m, n)), 1e-12);
}

TEST(RocAucTest, MatchesMannWhitneyOracle) {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> size(1, 50);
  for (int trial = 0; trial < 100; ++trial) {
    const bool coarse = trial % 3 == 0;
    const auto m = oracle::RandomScores(rng, size(rng), coarse);
    const auto n = oracle::RandomScores(rng, size(rng), coarse);
    EXPECT_NEAR(RocAuc(Scores(m, n)), oracle::MannWhitneyAuc(m, n), 1e-9);
  }
}

TEST(RocAucTest, InvariantUnderMonotoneTransform) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    auto m = oracle::RandomScores(rng, 30, trial % 2 == 0);
    auto n = oracle::RandomScores(rng, 30, trial % 2 == 0);
    const double before = RocAuc(Scores(m, n));
    auto f = [](double x) { return std::exp(3.0 * x) - 7.0; };
    for (double& v : m) v = f(v);
    for (double& v : n) v = f(v);
    EXPECT_NEAR(RocAuc(Scores(m, n)), before, 1e-12);
  }
}

TEST(RocCurveTest, EndpointsAndMonotone) {
  std::mt19937_64 rng(13);
  const auto set = Scores(oracle::RandomScores(rng, 40, true),
                          oracle::RandomScores(rng, 35, true));
  const RocCurve curve = ComputeRoc(set);
  ASSERT_GE(curve.size(), 2u);
  EXPECT_EQ(curve.front().fpr, 0.0);
  EXPECT_EQ(curve.front().tpr, 0.0);
  EXPECT_EQ(curve.back().fpr, 1.0);
  EXPECT_EQ(curve.back().tpr, 1.0);
  for (size_t i = 1; i < curve.size(); ++i) {
    EXPECT_GE(curve[i].fpr, curve[i - 1].fpr);
    EXPECT_GE(curve[i].tpr, curve[i - 1].tpr);
    EXPECT_LT(curve[i].threshold, curve[i - 1].threshold);
  }
}

TEST(RocCurveTest, IntegratesToAuc) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 100; ++trial) {
    const auto set = Scores(oracle::RandomScores(rng, 1 + trial % 50, true),
                            oracle::RandomScores(rng, 1 + (trial * 7) % 50,
                                                 trial % 2 == 0));
    EXPECT_NEAR(IntegrateRoc(ComputeRoc(set)), RocAuc(set), 1e-9);
  }
}

TEST(TprAtFprTest, ZeroCapScansAboveHighestNonMember) {
  const auto r = TprAtFpr(Scores({0.9, 0.4}, {0.8, 0.1}), 0.0);
  EXPECT_DOUBLE_EQ(r.tpr, 0.5);
  EXPECT_TRUE(r.small_sample);
}

TEST(TprAtFprTest, FullCapIsOne) {
  std::mt19937_64 rng(3);
  const auto set = Scores(oracle::RandomScores(rng, 10, false),
                          oracle::RandomScores(rng, 10, false));
  EXPECT_DOUBLE_EQ(TprAtFpr(set, 1.0).tpr, 1.0);
}

TEST(TprAtFprTest, PerfectSeparationAtAnyCap) {
  const auto set = Scores({0.7, 0.8, 0.9}, {0.1, 0.2, 0.3});
  for (double cap : {0.0, 0.001, 0.1, 1.0}) {
    EXPECT_DOUBLE_EQ(TprAtFpr(set, cap).tpr, 1.0);
  }
}

TEST(TprAtFprTest, MatchesExhaustiveScanExactly) {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<int> size(1, 60);
  for (int trial = 0; trial < 100; ++trial) {
    const auto m = oracle::RandomScores(rng, size(rng), trial % 2 == 0);
    const auto n = oracle::RandomScores(rng, size(rng), trial % 2 == 0);
    for (double cap : {0.0, 0.001, 0.01, 0.05, 0.1, 0.25, 0.5, 1.0}) {
      EXPECT_EQ(TprAtFpr(Scores(m, n), cap).tpr,
                oracle::ExhaustiveTprAtFpr(m, n, cap));
    }
  }
}

TEST(TprAtFprTest, NonDecreasingInCap) {
  std::mt19937_64 rng(41);
  const auto set = Scores(oracle::RandomScores(rng, 50, true),
                          oracle::RandomScores(rng, 50, false));
  double previous = 0.0;
  for (int i = 0; i <= 100; ++i) {
    const double tpr = TprAtFpr(set, i / 100.0).tpr;
    EXPECT_GE(tpr, previous);
    previous = tpr;
  }
}

TEST(TprAtFprTest, SmallSampleFlag) {
  std::vector<double> n(999, 0.1);
  EXPECT_TRUE(TprAtFpr(Scores({0.5}, n), 0.001).small_sample);
  n.push_back(0.2);
  EXPECT_FALSE(TprAtFpr(Scores({0.5}, n), 0.001).small_sample);
}

TEST(TprAtFprTest, RejectsCapOutsideUnitInterval) {
  EXPECT_THROW(TprAtFpr(Scores({0.5}, {0.1}), 1.5), Error);
  EXPECT_THROW(TprAtFpr(Scores({0.5}, {0.1}), -0.1), Error);
}

TEST(KlDivergenceTest, HandValues) {
  const std::vector<double> p{0.5, 0.5};
  const std::vector<double> q{0.25, 0.75};
  EXPECT_NEAR(KlDivergence(p, q),
              0.5 * std::log(2.0) + 0.5 * std::log(2.0 / 3.0), 1e-15);
  EXPECT_NEAR(KlDivergence(p, q), 0.1438410362, 1e-9);
  EXPECT_DOUBLE_EQ(KlDivergence(p, p), 0.0);
}

TEST(KlDivergenceTest, ClampKeepsZeroEntriesFinite) {
  const std::vector<double> p{1.0, 0.0};
  const std::vector<double> q{0.0, 1.0};
  const double kl = KlDivergence(p, q);
  EXPECT_TRUE(std::isfinite(kl));
  EXPECT_NEAR(kl, std::log(1e12) + 1e-12 * std::log(1e-12), 1e-9);
}

TEST(KlDivergenceTest, NonNegativeOnRandomPairs) {
  std::mt19937_64 rng(8);
  std::gamma_distribution<double> g(0.5, 1.0);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> p(5);
    std::vector<double> q(5);
    double sp = 0.0;
    double sq = 0.0;
    for (int k = 0; k < 5; ++k) {
      sp += p[k] = g(rng);
      sq += q[k] = g(rng);
    }
    for (int k = 0; k < 5; ++k) {
      p[k] /= sp;
      q[k] /= sq;
    }
    EXPECT_GE(KlDivergence(p, q), -1e-12);
  }
}

TEST(KlDivergenceTest, LengthMismatchIsShapeError) {
  const std::vector<double> p{1.0};
  const std::vector<double> q{0.5, 0.5};
  try {
    KlDivergence(p, q);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kShape);
  }
}

TEST(RocCsvTest, WritesHeaderAndRows) {
  const auto path = std::filesystem::temp_directory_path() /
                    "leakaudit_metrics_test" / "roc.csv";
  const RocCurve curve = ComputeRoc(Scores({0.9}, {0.1}));
  WriteRocCsv(path, curve);
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "threshold,fpr,tpr");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, static_cast<int>(curve.size()));
  std::filesystem::remove_all(path.parent_path());
}

}  // namespace
}  // namespace leakaudit
