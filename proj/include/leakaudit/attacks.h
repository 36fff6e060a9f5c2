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

#ifndef LEAKAUDIT_ATTACKS_H_
#define LEAKAUDIT_ATTACKS_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include "leakaudit/compression.h"
#include "leakaudit/data.h"
#include "leakaudit/meta_classifier.h"
#include "leakaudit/metrics.h"
#include "leakaudit/nn.h"

namespace leakaudit {

// ---------------------------------------------------------------------------
// Feature construction
// ---------------------------------------------------------------------------

// How a pair of posteriors (original p_o, compressed p_c) becomes one
// attack feature vector:
//   kSortedConcat       pi(p_o) || pi(p_c)                (2C)
//   kSortedConcatLabel  pi(p_o) || pi(p_c) || onehot(y)   (3C)
//   kDirectConcatLabel  p_o || p_c || onehot(y)           (3C)
//   kL2DistanceLabel    |p_o - p_c|_2 || onehot(y)        (C + 1)
// where pi sorts p_o in descending order.
enum class SrConstruction {
  kSortedConcat,
  kSortedConcatLabel,
  kDirectConcatLabel,
  kL2DistanceLabel,
};

std::string_view SrConstructionName(SrConstruction construction);
SrConstruction ParseSrConstruction(std::string_view name);
int SrFeatureLength(SrConstruction construction, int classes);

// Indices of `p` ordered by descending value; equal values keep index order.
std::vector<size_t> DescendingOrder(std::span<const double> p);

// Posterior sorted descending, optionally followed by onehot(label).
std::vector<double> BuildNrMetadata(std::span<const double> posterior,
                                    int label, bool with_label);

std::vector<double> BuildSrMetadata(std::span<const double> p_original,
                                    std::span<const double> p_compressed,
                                    int label, SrConstruction construction);

Matrix BuildNrMetadataBatch(const Matrix& posteriors,
                            std::span<const int> labels, bool with_label);
Matrix BuildSrMetadataBatch(const Matrix& p_original,
                            const Matrix& p_compressed,
                            std::span<const int> labels,
                            SrConstruction construction);

// ---------------------------------------------------------------------------
// Metric attacks
// ---------------------------------------------------------------------------

enum class NrMetric { kLoss, kModifiedEntropy };

std::string_view NrMetricName(NrMetric metric);

// -(1 - p_y) log p_y - sum_{k != y} p_k log(1 - p_k), with the arguments of
// both logs clamped at 1e-12.
double ModifiedEntropy(std::span<const double> posterior, int label);

std::vector<double> MetricValues(NrMetric metric, const Matrix& posteriors,
                                 std::span<const int> labels);

// Member iff the metric is strictly below tau; a value equal to tau is a
// non-member.
std::vector<uint8_t> NrMetricLossPredict(const Matrix& posteriors,
                                         std::span<const int> labels,
                                         double tau);
std::vector<uint8_t> NrMetricModifiedEntropyPredict(
    const Matrix& posteriors, std::span<const int> labels, double tau);

struct ThresholdCalibration {
  double tau = 0.0;
  double balanced_accuracy = 0.5;
};

// Threshold maximizing balanced accuracy of "value < tau => member". The
// candidates are the smallest value, the midpoints between consecutive
// distinct values, and the successor of the largest value; among equally
// good candidates the smallest wins.
ThresholdCalibration CalibrateThreshold(std::span<const double> member_values,
                                        std::span<const double> nonmember_values);

// ---------------------------------------------------------------------------
// Attack runners
// ---------------------------------------------------------------------------

struct MembershipSets {
  TabularDataset members;
  TabularDataset nonmembers;
};

// Shadow side: the adversary's own data (ground truth known). Victim side:
// the audited model's training set (members) and held-out set.
struct AttackData {
  MembershipSets shadow;
  MembershipSets victim;
};

AttackData MakeAttackData(const TabularDataset& dataset,
                          const SplitPlan& split);

// Scores in [0, 1] plus the hard decision taken for every sample.
struct AttackOutcome {
  AttackScoreSet scores;
  std::vector<uint8_t> member_predictions;
  std::vector<uint8_t> nonmember_predictions;

  double BalancedAccuracy() const;
};

// Decisions by score >= threshold.
AttackOutcome OutcomeFromScores(AttackScoreSet scores,
                                double threshold = 0.5);

// Randomly reassigns the pooled (score, decision) pairs to the member and
// non-member groups, keeping group sizes. A sound attack scores ~0.5 on the
// result.
AttackOutcome ShuffleMembership(const AttackOutcome& outcome, uint64_t seed);

struct MetricAttackResult {
  ThresholdCalibration calibration;
  AttackOutcome outcome;  // scores are exp(-metric)
};

// Threshold calibrated on the shadow model, applied to the victim model.
MetricAttackResult RunNrMetric(NrMetric metric, const FcnModel& shadow_model,
                               const FcnModel& victim_model,
                               const AttackData& data);

struct TrainedAttackResult {
  MetaClassifier classifier;
  AttackOutcome outcome;
};

// Meta-classifier on sorted posteriors (optionally with the one-hot label)
// of the shadow model, evaluated on the victim model.
TrainedAttackResult RunNrTrained(const FcnModel& shadow_model,
                                 const FcnModel& victim_model,
                                 const AttackData& data, bool with_label,
                                 MetaClassifierKind kind,
                                 const MetaHyperparameters& hyper,
                                 uint64_t seed);

struct ModelPair {
  const FcnModel* original = nullptr;
  const FcnModel* compressed = nullptr;
};

// Shadow meta-records for a single-reference attack: members from the shadow
// training set (label 1), non-members from the shadow test set (label 0).
MetaDataset BuildSrTrainingData(const ModelPair& shadow,
                                const MembershipSets& shadow_sets,
                                SrConstruction construction);

TrainedAttackResult RunSr(const ModelPair& shadow, const ModelPair& victim,
                          const AttackData& data, SrConstruction construction,
                          MetaClassifierKind kind,
                          const MetaHyperparameters& hyper, uint64_t seed);

// ---------------------------------------------------------------------------
// Multi-reference attack
// ---------------------------------------------------------------------------

enum class Adversary { kAdversary1, kAdversary2 };

std::string_view AdversaryName(Adversary adversary);

// Models (and, for adversary 1, single-reference classifiers) queried to
// build multi-reference features for one side (shadow or victim).
struct MrInput {
  Adversary adversary = Adversary::kAdversary1;
  SrConstruction construction = SrConstruction::kSortedConcatLabel;
  const FcnModel* original = nullptr;  // adversary 1 only
  // Non-decreasing degree_tag order within one family.
  std::vector<const CompressedModel*> compressed_models;
  std::vector<const MetaClassifier*> sr_classifiers;  // adversary 1 only

  // kConfiguration: fewer than two models, missing original or classifiers
  // for adversary 1. kOrdering: degree tags decrease or families differ.
  void Validate() const;
};

// Adversary 1: per model, the SR classifier's [1 - p, p] (length 2n).
// Adversary 2: the raw compressed posteriors (length n * C).
std::vector<double> MrPosteriorConcat(std::span<const double> sample,
                                      int label, const MrInput& input);
Matrix MrPosteriorConcatBatch(const Matrix& samples,
                              std::span<const int> labels,
                              const MrInput& input);

// Cross-entropy of each model in order (length n). Throws kOrdering when
// degree tags decrease.
std::vector<double> MrLossConcat(
    std::span<const double> sample, int label,
    std::span<const CompressedModel* const> ordered_models);
Matrix MrLossConcatBatch(const Matrix& samples, std::span<const int> labels,
                         std::span<const CompressedModel* const> ordered_models);

// Posterior block followed by the loss block.
Matrix MrFeatures(const Matrix& samples, std::span<const int> labels,
                  const MrInput& input);
int MrFeatureLength(const MrInput& input, int classes);

struct MrSettings {
  MetaClassifierKind sr_kind = MetaClassifierKind::kRandomForest;
  MetaHyperparameters hyper;
  uint64_t seed = 0;
  // Adversary 1: with k >= 2 the shadow-side SR probabilities are k-fold
  // out-of-fold predictions; 0 uses the in-sample shadow SR classifiers.
  int cross_fit_folds = 5;
};

struct MrResult {
  MetaClassifier classifier;  // MLP
  AttackOutcome outcome;
  // Adversary 1: the SR classifiers used on the victim side.
  std::vector<MetaClassifier> victim_sr_classifiers;
};

// Trains the MLP multi-reference classifier on shadow features. For
// adversary 1, fresh victim-side SR classifiers are fitted on shadow
// meta-records (one per victim compressed model, paired with the matching
// shadow compressed model) and used to featurize victim queries.
MrResult RunMr(const MrInput& shadow, const MrInput& victim,
               const AttackData& data, const MrSettings& settings);

// ---------------------------------------------------------------------------
// Diagnostics and export
// ---------------------------------------------------------------------------

struct PosteriorShift {
  double mean_member_kl = 0.0;
  double mean_nonmember_kl = 0.0;
};

// Mean KL(original || compressed) over the victim members and non-members.
PosteriorShift MeanPosteriorKl(const FcnModel& original,
                               const FcnModel& compressed,
                               const MembershipSets& sets);

// One row per record, membership label in the last column, no header.
void WriteMetaCsv(const std::filesystem::path& path, const MetaDataset& data);

}  // namespace leakaudit

#endif  // LEAKAUDIT_ATTACKS_H_
