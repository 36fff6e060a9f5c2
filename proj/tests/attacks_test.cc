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

#include "leakaudit/attacks.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "leakaudit/compression.h"
#include "leakaudit/error.h"
#include "oracles.h"

namespace leakaudit {
namespace {

using Vec = std::vector<double>;

// Single-layer model whose posterior is `p` for every input.
FcnModel ConstantPosteriorModel(const Vec& p, int input_dim) {
  const std::vector<int> sizes{input_dim, static_cast<int>(p.size())};
  FcnModel m = FcnModel::Zeros(sizes);
  for (size_t k = 0; k < p.size(); ++k) m.biases[0][k] = std::log(p[k]);
  return m;
}

CompressedModel Wrap(const FcnModel& m, int tag) {
  CompressedModel c = PruneL1(m, 0.0);
  c.degree_tag = tag;
  return c;
}

MetaClassifier ConstantHalfClassifier(int dim) {
  return MetaClassifier(LogisticRegression::FromParameters(Vector::Zero(dim),
                                                           0.0));
}

// Small overfit setting shared by the runner tests.
class AttackRunnerTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    const TabularDataset data = SynthGenerate(
        {.samples = 600, .features = 10, .classes = 6, .cluster_spread = 1.5,
         .seed = 3});
    split_ = new SplitPlan(MakeSplit(
        data, {.victim_train = 100, .victim_test = 100, .shadow_train = 100,
               .shadow_test = 100},
        4));
    attack_data_ = new AttackData(MakeAttackData(data, *split_));
    const std::vector<int> sizes{10, 64, 6};
    TrainConfig config;
    config.max_epochs = 60;
    config.batch_size = 16;
    config.learning_rate = 0.1;
    victim_ = new FcnModel(Train(FcnModel::Create(sizes, 0.0, 1),
                                 attack_data_->victim.members,
                                 attack_data_->victim.members, config));
    config.seed = 1;
    shadow_ = new FcnModel(Train(FcnModel::Create(sizes, 0.0, 2),
                                 attack_data_->shadow.members,
                                 attack_data_->shadow.members, config));
    for (double s : {0.5, 0.8}) {
      victim_pruned_.push_back(PruneL1(*victim_, s));
      shadow_pruned_.push_back(PruneL1(*shadow_, s));
    }
  }
  static void TearDownTestSuite() {
    delete split_;
    delete attack_data_;
    delete victim_;
    delete shadow_;
    victim_pruned_.clear();
    shadow_pruned_.clear();
  }

  static MetaHyperparameters SmallHyper() {
    MetaHyperparameters h;
    h.rf.num_trees = 20;
    h.mlp.epochs = 60;
    return h;
  }

  static SplitPlan* split_;
  static AttackData* attack_data_;
  static FcnModel* victim_;
  static FcnModel* shadow_;
  static std::vector<CompressedModel> victim_pruned_;
  static std::vector<CompressedModel> shadow_pruned_;
};

SplitPlan* AttackRunnerTest::split_ = nullptr;
AttackData* AttackRunnerTest::attack_data_ = nullptr;
FcnModel* AttackRunnerTest::victim_ = nullptr;
FcnModel* AttackRunnerTest::shadow_ = nullptr;
std::vector<CompressedModel> AttackRunnerTest::victim_pruned_;
std::vector<CompressedModel> AttackRunnerTest::shadow_pruned_;

void ExpectUnitScores(const AttackOutcome& o) {
  for (const Vec* s : {&o.scores.member_scores, &o.scores.nonmember_scores}) {
    for (double v : *s) {
      EXPECT_TRUE(std::isfinite(v));
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
  }
}

TEST(NrMetadataTest, SortsPosterior) {
  EXPECT_EQ(BuildNrMetadata(Vec{0.1, 0.7, 0.2}, 1, false),
            (Vec{0.7, 0.2, 0.1}));
  EXPECT_EQ(BuildNrMetadata(Vec{0.1, 0.7, 0.2}, 1, true),
            (Vec{0.7, 0.2, 0.1, 0, 1, 0}));
  const Vec uniform(4, 0.25);
  EXPECT_EQ(BuildNrMetadata(uniform, 0, false), uniform);
}

TEST(NrMetadataTest, LabelOutOfRangeIsInputError) {
  try {
    BuildNrMetadata(Vec{0.5, 0.5}, 2, true);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInput);
  }
}

TEST(SrMetadataTest, SortedConcatExample) {
  const Vec po{0.1, 0.7, 0.2};
  const Vec pc{0.2, 0.5, 0.3};
  EXPECT_EQ(BuildSrMetadata(po, pc, 0, SrConstruction::kSortedConcat),
            (Vec{0.7, 0.2, 0.1, 0.5, 0.3, 0.2}));
  EXPECT_EQ(BuildSrMetadata(po, pc, 2, SrConstruction::kSortedConcatLabel),
            (Vec{0.7, 0.2, 0.1, 0.5, 0.3, 0.2, 0, 0, 1}));
  EXPECT_EQ(BuildSrMetadata(po, pc, 1, SrConstruction::kDirectConcatLabel),
            (Vec{0.1, 0.7, 0.2, 0.2, 0.5, 0.3, 0, 1, 0}));
}

TEST(SrMetadataTest, L2Distance) {
  const Vec po{1.0, 0.0};
  const Vec pc{0.0, 1.0};
  const Vec f = BuildSrMetadata(po, pc, 0, SrConstruction::kL2DistanceLabel);
  ASSERT_EQ(f.size(), 3u);
  EXPECT_NEAR(f[0], std::sqrt(2.0), 1e-15);
  EXPECT_EQ(f[1], 1.0);
  EXPECT_EQ(BuildSrMetadata(po, po, 1, SrConstruction::kL2DistanceLabel)[0],
            0.0);
}

TEST(SrMetadataTest, FeatureLengths) {
  const Vec po{0.2, 0.3, 0.5, 0.0};
  for (auto c : {SrConstruction::kSortedConcat,
                 SrConstruction::kSortedConcatLabel,
                 SrConstruction::kDirectConcatLabel,
                 SrConstruction::kL2DistanceLabel}) {
    EXPECT_EQ(BuildSrMetadata(po, po, 0, c).size(),
              static_cast<size_t>(SrFeatureLength(c, 4)));
    EXPECT_EQ(ParseSrConstruction(SrConstructionName(c)), c);
  }
  EXPECT_EQ(SrFeatureLength(SrConstruction::kSortedConcat, 5), 10);
  EXPECT_EQ(SrFeatureLength(SrConstruction::kSortedConcatLabel, 5), 15);
  EXPECT_EQ(SrFeatureLength(SrConstruction::kDirectConcatLabel, 5), 15);
  EXPECT_EQ(SrFeatureLength(SrConstruction::kL2DistanceLabel, 5), 6);
  EXPECT_EQ(ParseSrConstruction("2"), SrConstruction::kSortedConcatLabel);
  EXPECT_THROW(ParseSrConstruction("bogus"), Error);
}

TEST(SrMetadataTest, LengthMismatchIsShapeError) {
  try {
    BuildSrMetadata(Vec{0.5, 0.5}, Vec{1.0}, 0, SrConstruction::kSortedConcat);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kShape);
  }
}

// The first half is sorted and both halves share one permutation, which the
// inverse permutation undoes.
TEST(SrMetadataTest, SharedPermutationRoundTrip) {
  std::mt19937_64 rng(6);
  std::gamma_distribution<double> g(1.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const int c = 2 + trial % 9;
    Vec po(c);
    Vec pc(c);
    for (int k = 0; k < c; ++k) {
      po[k] = trial % 5 == 0 ? std::round(g(rng)) : g(rng);
      pc[k] = g(rng);
    }
    const Vec f = BuildSrMetadata(po, pc, 0, SrConstruction::kSortedConcat);
    EXPECT_TRUE(std::is_sorted(f.begin(), f.begin() + c, std::greater<>()));
    const auto order = DescendingOrder(po);
    Vec back_o(c);
    Vec back_c(c);
    for (int r = 0; r < c; ++r) {
      back_o[order[r]] = f[r];
      back_c[order[r]] = f[c + r];
    }
    EXPECT_EQ(back_o, po);
    EXPECT_EQ(back_c, pc);
  }
}

TEST(SrMetadataTest, BatchMatchesRows) {
  Matrix po(2, 3);
  po << 0.1, 0.7, 0.2, 0.5, 0.25, 0.25;
  Matrix pc(2, 3);
  pc << 0.2, 0.5, 0.3, 0.3, 0.3, 0.4;
  const std::vector<int> y{1, 2};
  const Matrix batch =
      BuildSrMetadataBatch(po, pc, y, SrConstruction::kSortedConcatLabel);
  for (int r = 0; r < 2; ++r) {
    const Vec row = BuildSrMetadata(RowSpan(po, r), RowSpan(pc, r), y[r],
                                    SrConstruction::kSortedConcatLabel);
    EXPECT_EQ(Vec(batch.row(r).begin(), batch.row(r).end()), row);
  }
}

TEST(ModifiedEntropyTest, HandValues) {
  EXPECT_DOUBLE_EQ(ModifiedEntropy(Vec{0.0, 1.0, 0.0}, 1), 0.0);
  EXPECT_NEAR(ModifiedEntropy(Vec{0.5, 0.5}, 0), std::log(2.0), 1e-15);
  // -(1-p_y) ln p_y - sum_{k != y} p_k ln(1 - p_k)
  const double expected =
      -(1 - 0.6) * std::log(0.6) - 0.3 * std::log(0.7) - 0.1 * std::log(0.9);
  EXPECT_NEAR(ModifiedEntropy(Vec{0.3, 0.6, 0.1}, 1), expected, 1e-15);
}

TEST(NrMetricTest, StrictThresholdRule) {
  Matrix p(3, 2);
  p << 0.0, 1.0, 0.5, 0.5, 0.9, 0.1;
  const std::vector<int> y{1, 0, 0};
  const auto losses = MetricValues(NrMetric::kLoss, p, y);
  EXPECT_EQ(losses[0], 0.0);
  const auto at_half = NrMetricLossPredict(p, y, 0.5);
  EXPECT_EQ(at_half[0], 1);
  const double tie = losses[1];
  const auto at_tie = NrMetricLossPredict(p, y, tie);
  EXPECT_EQ(at_tie[1], 0);
  for (double tau : {0.05, 0.2, 0.7, 1.0}) {
    const auto pred = NrMetricLossPredict(p, y, tau);
    const auto mentr = MetricValues(NrMetric::kModifiedEntropy, p, y);
    const auto mpred = NrMetricModifiedEntropyPredict(p, y, tau);
    for (int i = 0; i < 3; ++i) {
      EXPECT_EQ(pred[i], losses[i] < tau ? 1 : 0);
      EXPECT_EQ(mpred[i], mentr[i] < tau ? 1 : 0);
    }
  }
}

TEST(CalibrateThresholdTest, SeparablePopulations) {
  const ThresholdCalibration c =
      CalibrateThreshold(Vec{0, 0, 0}, Vec{1, 1, 1, 1});
  EXPECT_DOUBLE_EQ(c.tau, 0.5);
  EXPECT_DOUBLE_EQ(c.balanced_accuracy, 1.0);
}

TEST(CalibrateThresholdTest, IdenticalPopulations) {
  const Vec v{0.3, 0.1, 0.7, 0.7};
  EXPECT_DOUBLE_EQ(CalibrateThreshold(v, v).balanced_accuracy, 0.5);
}

TEST(CalibrateThresholdTest, MatchesBruteForceScan) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 200; ++trial) {
    const auto m = oracle::RandomScores(rng, 1 + trial % 40, trial % 2 == 0);
    const auto n = oracle::RandomScores(rng, 1 + (trial * 3) % 40,
                                        trial % 2 == 0);
    const ThresholdCalibration c = CalibrateThreshold(m, n);
    const double best = oracle::BestThresholdBalancedAccuracy(m, n);
    EXPECT_DOUBLE_EQ(c.balanced_accuracy, best);
    EXPECT_DOUBLE_EQ(oracle::ThresholdBalancedAccuracy(m, n, c.tau), best);
  }
}

TEST(OutcomeTest, ThresholdAndShuffle) {
  const AttackOutcome o = OutcomeFromScores({{0.9, 0.5, 0.2}, {0.1, 0.6}});
  EXPECT_EQ(o.member_predictions, (std::vector<uint8_t>{1, 1, 0}));
  EXPECT_EQ(o.nonmember_predictions, (std::vector<uint8_t>{0, 1}));
  EXPECT_DOUBLE_EQ(o.BalancedAccuracy(), 0.5 * (2.0 / 3.0 + 0.5));

  const AttackOutcome s = ShuffleMembership(o, 5);
  EXPECT_EQ(s.scores.member_scores.size(), 3u);
  EXPECT_EQ(s.scores.nonmember_scores.size(), 2u);
  Vec before = o.scores.member_scores;
  before.insert(before.end(), o.scores.nonmember_scores.begin(),
                o.scores.nonmember_scores.end());
  Vec after = s.scores.member_scores;
  after.insert(after.end(), s.scores.nonmember_scores.begin(),
               s.scores.nonmember_scores.end());
  std::sort(before.begin(), before.end());
  std::sort(after.begin(), after.end());
  EXPECT_EQ(before, after);
  const AttackOutcome again = ShuffleMembership(o, 5);
  EXPECT_EQ(again.scores.member_scores, s.scores.member_scores);
}

TEST(OutcomeTest, ShuffledPerfectAttackIsNearChance) {
  Vec m(500, 1.0);
  Vec n(500, 0.0);
  const AttackOutcome o = OutcomeFromScores({m, n});
  EXPECT_DOUBLE_EQ(o.BalancedAccuracy(), 1.0);
  const double shuffled = ShuffleMembership(o, 1).BalancedAccuracy();
  EXPECT_NEAR(shuffled, 0.5, 0.05);
}

TEST(MrInputTest, ValidationErrors) {
  const FcnModel base = ConstantPosteriorModel({0.5, 0.5}, 2);
  const CompressedModel a = Wrap(base, 60);
  const CompressedModel b = Wrap(base, 70);
  const CompressedModel q = QuantizeInt8(base, QuantMode::kPostTraining);
  auto code = [](const MrInput& input) {
    try {
      input.Validate();
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::kIo;
  };
  MrInput input;
  input.adversary = Adversary::kAdversary2;
  input.compressed_models = {&a};
  EXPECT_EQ(code(input), ErrorCode::kConfiguration);
  input.compressed_models = {&b, &a};
  EXPECT_EQ(code(input), ErrorCode::kOrdering);
  input.compressed_models = {&a, &q};
  EXPECT_EQ(code(input), ErrorCode::kOrdering);
  input.compressed_models = {&a, &b};
  input.Validate();
  input.compressed_models = {&a, &a};
  input.Validate();
  input.adversary = Adversary::kAdversary1;
  EXPECT_EQ(code(input), ErrorCode::kConfiguration);
  input.original = &base;
  EXPECT_EQ(code(input), ErrorCode::kConfiguration);
}

TEST(MrPosteriorConcatTest, AdversaryTwoConcatenatesPosteriors) {
  const CompressedModel a = Wrap(ConstantPosteriorModel({0.2, 0.8}, 3), 60);
  const CompressedModel b = Wrap(ConstantPosteriorModel({0.6, 0.4}, 3), 70);
  MrInput input;
  input.adversary = Adversary::kAdversary2;
  input.compressed_models = {&a, &b};
  const Vec f = MrPosteriorConcat(Vec{1.0, -2.0, 0.5}, 0, input);
  const Vec expected{0.2, 0.8, 0.6, 0.4};
  ASSERT_EQ(f.size(), 4u);
  for (size_t i = 0; i < 4; ++i) EXPECT_NEAR(f[i], expected[i], 1e-12);
  EXPECT_EQ(MrFeatureLength(input, 2), 2 * 2 + 2);
}

TEST(MrPosteriorConcatTest, AdversaryOneWithHalfClassifiers) {
  const FcnModel original = ConstantPosteriorModel({0.3, 0.7}, 2);
  const CompressedModel a = Wrap(ConstantPosteriorModel({0.2, 0.8}, 2), 60);
  const CompressedModel b = Wrap(ConstantPosteriorModel({0.6, 0.4}, 2), 70);
  const CompressedModel c = Wrap(ConstantPosteriorModel({0.5, 0.5}, 2), 80);
  const MetaClassifier half = ConstantHalfClassifier(
      SrFeatureLength(SrConstruction::kSortedConcatLabel, 2));
  MrInput input;
  input.original = &original;
  input.compressed_models = {&a, &b, &c};
  input.sr_classifiers = {&half, &half, &half};
  const Vec f = MrPosteriorConcat(Vec{0.0, 1.0}, 1, input);
  EXPECT_EQ(f, Vec(6, 0.5));
  EXPECT_EQ(MrFeatureLength(input, 2), 2 * 3 + 3);
}

TEST(MrPosteriorConcatTest, ReversingEqualDegreeModelsSwapsBlocks) {
  const CompressedModel a = Wrap(ConstantPosteriorModel({0.2, 0.8}, 2), 60);
  const CompressedModel b = Wrap(ConstantPosteriorModel({0.9, 0.1}, 2), 60);
  MrInput input;
  input.adversary = Adversary::kAdversary2;
  input.compressed_models = {&a, &b};
  const Vec forward = MrPosteriorConcat(Vec{0.0, 0.0}, 0, input);
  input.compressed_models = {&b, &a};
  const Vec reversed = MrPosteriorConcat(Vec{0.0, 0.0}, 0, input);
  EXPECT_EQ(Vec(forward.begin(), forward.begin() + 2),
            Vec(reversed.begin() + 2, reversed.end()));
  EXPECT_EQ(Vec(forward.begin() + 2, forward.end()),
            Vec(reversed.begin(), reversed.begin() + 2));
}

TEST(MrLossConcatTest, MatchesComponentLosses) {
  const std::vector<int> sizes{4, 5, 3};
  const FcnModel base = FcnModel::Create(sizes, 0.0, 3);
  const CompressedModel p60 = PruneL1(base, 0.6);
  const CompressedModel p80 = PruneL1(base, 0.8);
  const std::vector<const CompressedModel*> models{&p60, &p80};
  const Vec x{0.3, -0.4, 1.2, 0.0};
  const Vec losses = MrLossConcat(x, 2, models);
  ASSERT_EQ(losses.size(), 2u);
  Matrix row(1, 4);
  std::copy(x.begin(), x.end(), row.data());
  for (size_t j = 0; j < 2; ++j) {
    const Matrix p = Forward(models[j]->model, row);
    EXPECT_EQ(losses[j], CrossEntropyLoss(RowSpan(p, 0), {2}));
  }
  const std::vector<const CompressedModel*> twice{&p60, &p60};
  const Vec dup = MrLossConcat(x, 1, twice);
  EXPECT_EQ(dup[0], dup[1]);
  const CompressedModel sure =
      Wrap(ConstantPosteriorModel({1.0 - 1e-300, 1e-300}, 4), 10);
  const std::vector<const CompressedModel*> confident{&sure, &sure};
  EXPECT_EQ(MrLossConcat(x, 0, confident), Vec(2, 0.0));
  const std::vector<const CompressedModel*> reversed{&p80, &p60};
  try {
    MrLossConcat(x, 0, reversed);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kOrdering);
  }
}

TEST_F(AttackRunnerTest, VictimIsOverfit) {
  EXPECT_GT(Accuracy(*victim_, attack_data_->victim.members) -
                Accuracy(*victim_, attack_data_->victim.nonmembers),
            0.2);
}

TEST_F(AttackRunnerTest, MetricAttacksBeatChance) {
  for (NrMetric metric : {NrMetric::kLoss, NrMetric::kModifiedEntropy}) {
    const MetricAttackResult r =
        RunNrMetric(metric, *shadow_, *victim_, *attack_data_);
    ExpectUnitScores(r.outcome);
    EXPECT_GT(r.outcome.BalancedAccuracy(), 0.55) << NrMetricName(metric);
    EXPECT_EQ(r.outcome.member_predictions.size(), 100u);
  }
}

TEST_F(AttackRunnerTest, TrainedNrIsDeterministic) {
  const auto a = RunNrTrained(*shadow_, *victim_, *attack_data_, true,
                              MetaClassifierKind::kRandomForest, SmallHyper(),
                              7);
  const auto b = RunNrTrained(*shadow_, *victim_, *attack_data_, true,
                              MetaClassifierKind::kRandomForest, SmallHyper(),
                              7);
  ExpectUnitScores(a.outcome);
  EXPECT_EQ(a.outcome.scores.member_scores, b.outcome.scores.member_scores);
  EXPECT_GT(a.outcome.BalancedAccuracy(), 0.55);
}

TEST_F(AttackRunnerTest, SrOnIdenticalCopyCompletes) {
  const ModelPair shadow{shadow_, shadow_};
  const ModelPair victim{victim_, victim_};
  const MetaDataset train = BuildSrTrainingData(
      shadow, attack_data_->shadow, SrConstruction::kSortedConcat);
  ASSERT_EQ(train.features.rows(), 200);
  EXPECT_EQ(train.membership.front(), 1);
  EXPECT_EQ(train.membership.back(), 0);
  EXPECT_EQ(train.features.leftCols(6), train.features.rightCols(6));
  const auto r =
      RunSr(shadow, victim, *attack_data_, SrConstruction::kSortedConcat,
            MetaClassifierKind::kLogisticRegression, SmallHyper(), 1);
  ExpectUnitScores(r.outcome);
}

TEST_F(AttackRunnerTest, SrOnPrunedModelBeatsChance) {
  const ModelPair shadow{shadow_, &shadow_pruned_[1].model};
  const ModelPair victim{victim_, &victim_pruned_[1].model};
  for (auto c : {SrConstruction::kSortedConcat,
                 SrConstruction::kSortedConcatLabel,
                 SrConstruction::kDirectConcatLabel,
                 SrConstruction::kL2DistanceLabel}) {
    const auto r = RunSr(shadow, victim, *attack_data_, c,
                         MetaClassifierKind::kRandomForest, SmallHyper(), 2);
    ExpectUnitScores(r.outcome);
    EXPECT_GT(r.outcome.BalancedAccuracy(), 0.5) << SrConstructionName(c);
  }
}

TEST_F(AttackRunnerTest, MultiReferenceBothAdversaries) {
  for (Adversary adv : {Adversary::kAdversary1, Adversary::kAdversary2}) {
    MrInput shadow;
    shadow.adversary = adv;
    shadow.original = shadow_;
    shadow.compressed_models = {&shadow_pruned_[0], &shadow_pruned_[1]};
    MrInput victim = shadow;
    victim.original = victim_;
    victim.compressed_models = {&victim_pruned_[0], &victim_pruned_[1]};
    MrSettings settings;
    settings.hyper = SmallHyper();
    settings.seed = 3;
    settings.cross_fit_folds = 3;
    const MrResult r = RunMr(shadow, victim, *attack_data_, settings);
    ExpectUnitScores(r.outcome);
    EXPECT_EQ(r.classifier.kind(), MetaClassifierKind::kMlp);
    EXPECT_EQ(r.classifier.feature_dim(), MrFeatureLength(victim, 6));
    EXPECT_EQ(r.victim_sr_classifiers.size(),
              adv == Adversary::kAdversary1 ? 2u : 0u);
    EXPECT_GT(r.outcome.BalancedAccuracy(), 0.5) << AdversaryName(adv);
    const MrResult again = RunMr(shadow, victim, *attack_data_, settings);
    EXPECT_EQ(again.outcome.scores.member_scores,
              r.outcome.scores.member_scores);
  }
}

TEST_F(AttackRunnerTest, AdversaryTwoFeaturesIgnoreOriginal) {
  MrInput input;
  input.adversary = Adversary::kAdversary2;
  input.compressed_models = {&victim_pruned_[0], &victim_pruned_[1]};
  const auto& members = attack_data_->victim.members;
  const Matrix f = MrFeatures(members.features, members.labels, input);
  EXPECT_EQ(f.cols(), 2 * 6 + 2);
  input.original = shadow_;
  EXPECT_EQ(MrFeatures(members.features, members.labels, input), f);
}

TEST_F(AttackRunnerTest, DuplicatedModelCompletes) {
  MrInput shadow;
  shadow.adversary = Adversary::kAdversary1;
  shadow.original = shadow_;
  shadow.compressed_models = {&shadow_pruned_[1], &shadow_pruned_[1]};
  MrInput victim = shadow;
  victim.original = victim_;
  victim.compressed_models = {&victim_pruned_[1], &victim_pruned_[1]};
  MrSettings settings;
  settings.hyper = SmallHyper();
  settings.cross_fit_folds = 3;
  const MrResult r = RunMr(shadow, victim, *attack_data_, settings);
  ExpectUnitScores(r.outcome);
}

TEST_F(AttackRunnerTest, PosteriorShiftAndCsvExport) {
  const PosteriorShift same =
      MeanPosteriorKl(*victim_, *victim_, attack_data_->victim);
  EXPECT_NEAR(same.mean_member_kl, 0.0, 1e-12);
  EXPECT_NEAR(same.mean_nonmember_kl, 0.0, 1e-12);
  const PosteriorShift shift = MeanPosteriorKl(
      *victim_, victim_pruned_[1].model, attack_data_->victim);
  EXPECT_GT(shift.mean_member_kl, 0.0);
  EXPECT_GT(shift.mean_nonmember_kl, 0.0);

  const MetaDataset d = BuildSrTrainingData(
      {shadow_, &shadow_pruned_[0].model}, attack_data_->shadow,
      SrConstruction::kL2DistanceLabel);
  const auto path =
      std::filesystem::temp_directory_path() / "leakaudit_attacks_meta.csv";
  WriteMetaCsv(path, d);
  std::ifstream in(path);
  std::string line;
  int rows = 0;
  std::string first;
  while (std::getline(in, line)) {
    if (rows == 0) first = line;
    ++rows;
  }
  EXPECT_EQ(rows, 200);
  EXPECT_EQ(std::count(first.begin(), first.end(), ','), 7);
  EXPECT_EQ(first.substr(first.size() - 2), ",1");
  std::filesystem::remove(path);
}

}  // namespace
}  // namespace leakaudit
