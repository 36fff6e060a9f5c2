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
#include <limits>
#include <numeric>
#include <random>

#include <fmt/format.h>

#include "leakaudit/error.h"

namespace leakaudit {
namespace {

constexpr double kLogClamp = 1e-12;

void CheckPosterior(std::span<const double> p, int label) {
  if (p.empty()) throw Error(ErrorCode::kShape, "empty posterior");
  if (label < 0 || label >= static_cast<int>(p.size())) {
    throw Error(ErrorCode::kInput,
                fmt::format("label {} outside [0, {})", label, p.size()));
  }
}

void CheckBatch(const Matrix& rows, std::span<const int> labels) {
  if (static_cast<size_t>(rows.rows()) != labels.size()) {
    throw Error(ErrorCode::kShape,
                fmt::format("{} rows but {} labels", rows.rows(),
                            labels.size()));
  }
}

MetaDataset LabelledStack(const Matrix& members, const Matrix& nonmembers) {
  if (members.cols() != nonmembers.cols()) {
    throw Error(ErrorCode::kShape, "member / non-member feature width differ");
  }
  MetaDataset data;
  data.features.resize(members.rows() + nonmembers.rows(), members.cols());
  data.features.topRows(members.rows()) = members;
  data.features.bottomRows(nonmembers.rows()) = nonmembers;
  data.membership.assign(members.rows(), 1);
  data.membership.insert(data.membership.end(), nonmembers.rows(), 0);
  return data;
}

std::vector<double> ToVector(const Vector& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

AttackOutcome ScoreWith(const MetaClassifier& classifier,
                        const Matrix& member_features,
                        const Matrix& nonmember_features) {
  AttackScoreSet scores;
  scores.member_scores = ToVector(classifier.ScoreBatch(member_features));
  scores.nonmember_scores =
      ToVector(classifier.ScoreBatch(nonmember_features));
  return OutcomeFromScores(std::move(scores),
                           MetaClassifier::kDecisionThreshold);
}

void CheckOrdered(std::span<const CompressedModel* const> models) {
  for (size_t i = 0; i < models.size(); ++i) {
    if (models[i] == nullptr) {
      throw Error(ErrorCode::kConfiguration, "null compressed model");
    }
    if (i == 0) continue;
    if (models[i]->family() != models[0]->family()) {
      throw Error(ErrorCode::kOrdering,
                  fmt::format("models mix families {} and {}",
                              models[0]->Name(), models[i]->Name()));
    }
    if (models[i]->degree_tag < models[i - 1]->degree_tag) {
      throw Error(ErrorCode::kOrdering,
                  fmt::format("degree decreases from {} to {}",
                              models[i - 1]->Name(), models[i]->Name()));
    }
  }
}

void ValidateMrModels(const MrInput& input) {
  if (input.compressed_models.size() < 2) {
    throw Error(ErrorCode::kConfiguration,
                fmt::format("multi-reference attack needs at least two "
                            "compressed models, got {}",
                            input.compressed_models.size()));
  }
  if (input.adversary == Adversary::kAdversary1 && input.original == nullptr) {
    throw Error(ErrorCode::kConfiguration,
                "adversary 1 needs the original model");
  }
  CheckOrdered(input.compressed_models);
}

}  // namespace

std::string_view SrConstructionName(SrConstruction construction) {
  switch (construction) {
    case SrConstruction::kSortedConcat:
      return "sorted_concat";
    case SrConstruction::kSortedConcatLabel:
      return "sorted_concat_label";
    case SrConstruction::kDirectConcatLabel:
      return "direct_concat_label";
    case SrConstruction::kL2DistanceLabel:
      return "l2_distance_label";
  }
  return "unknown";
}

SrConstruction ParseSrConstruction(std::string_view name) {
  for (auto c : {SrConstruction::kSortedConcat,
                 SrConstruction::kSortedConcatLabel,
                 SrConstruction::kDirectConcatLabel,
                 SrConstruction::kL2DistanceLabel}) {
    if (name == SrConstructionName(c)) return c;
  }
  if (name == "1") return SrConstruction::kSortedConcat;
  if (name == "2") return SrConstruction::kSortedConcatLabel;
  if (name == "3") return SrConstruction::kDirectConcatLabel;
  if (name == "4") return SrConstruction::kL2DistanceLabel;
  throw Error(ErrorCode::kConfiguration,
              fmt::format("unknown feature construction '{}'", name));
}

int SrFeatureLength(SrConstruction construction, int classes) {
  switch (construction) {
    case SrConstruction::kSortedConcat:
      return 2 * classes;
    case SrConstruction::kSortedConcatLabel:
    case SrConstruction::kDirectConcatLabel:
      return 3 * classes;
    case SrConstruction::kL2DistanceLabel:
      return classes + 1;
  }
  return 0;
}

std::vector<size_t> DescendingOrder(std::span<const double> p) {
  std::vector<size_t> order(p.size());
  std::iota(order.begin(), order.end(), size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t a, size_t b) { return p[a] > p[b]; });
  return order;
}

std::vector<double> BuildNrMetadata(std::span<const double> posterior,
                                    int label, bool with_label) {
  CheckPosterior(posterior, label);
  const size_t c = posterior.size();
  std::vector<double> out(posterior.begin(), posterior.end());
  std::sort(out.begin(), out.end(), std::greater<>());
  if (with_label) {
    out.resize(2 * c, 0.0);
    out[c + label] = 1.0;
  }
  return out;
}

std::vector<double> BuildSrMetadata(std::span<const double> p_original,
                                    std::span<const double> p_compressed,
                                    int label, SrConstruction construction) {
  CheckPosterior(p_original, label);
  if (p_compressed.size() != p_original.size()) {
    throw Error(ErrorCode::kShape,
                fmt::format("posterior lengths {} and {} differ",
                            p_original.size(), p_compressed.size()));
  }
  const size_t c = p_original.size();
  std::vector<double> out;
  out.reserve(3 * c);
  switch (construction) {
    case SrConstruction::kSortedConcat:
    case SrConstruction::kSortedConcatLabel: {
      const std::vector<size_t> order = DescendingOrder(p_original);
      for (size_t k : order) out.push_back(p_original[k]);
      for (size_t k : order) out.push_back(p_compressed[k]);
      break;
    }
    case SrConstruction::kDirectConcatLabel:
      out.insert(out.end(), p_original.begin(), p_original.end());
      out.insert(out.end(), p_compressed.begin(), p_compressed.end());
      break;
    case SrConstruction::kL2DistanceLabel: {
      double sq = 0.0;
      for (size_t k = 0; k < c; ++k) {
        const double d = p_original[k] - p_compressed[k];
        sq += d * d;
      }
      out.push_back(std::sqrt(sq));
      break;
    }
  }
  if (construction != SrConstruction::kSortedConcat) {
    const size_t offset = out.size();
    out.resize(offset + c, 0.0);
    out[offset + label] = 1.0;
  }
  return out;
}

Matrix BuildNrMetadataBatch(const Matrix& posteriors,
                            std::span<const int> labels, bool with_label) {
  CheckBatch(posteriors, labels);
  const int width = static_cast<int>(posteriors.cols()) * (with_label ? 2 : 1);
  Matrix out(posteriors.rows(), width);
  for (Eigen::Index i = 0; i < posteriors.rows(); ++i) {
    const std::vector<double> row =
        BuildNrMetadata(RowSpan(posteriors, i), labels[i], with_label);
    std::copy(row.begin(), row.end(), MutableRowSpan(out, i).begin());
  }
  return out;
}

Matrix BuildSrMetadataBatch(const Matrix& p_original,
                            const Matrix& p_compressed,
                            std::span<const int> labels,
                            SrConstruction construction) {
  CheckBatch(p_original, labels);
  CheckBatch(p_compressed, labels);
  const int width =
      SrFeatureLength(construction, static_cast<int>(p_original.cols()));
  Matrix out(p_original.rows(), width);
  for (Eigen::Index i = 0; i < p_original.rows(); ++i) {
    const std::vector<double> row =
        BuildSrMetadata(RowSpan(p_original, i), RowSpan(p_compressed, i),
                        labels[i], construction);
    std::copy(row.begin(), row.end(), MutableRowSpan(out, i).begin());
  }
  return out;
}

std::string_view NrMetricName(NrMetric metric) {
  return metric == NrMetric::kLoss ? "loss" : "mentr";
}

double ModifiedEntropy(std::span<const double> posterior, int label) {
  CheckPosterior(posterior, label);
  double total = 0.0;
  for (size_t k = 0; k < posterior.size(); ++k) {
    const double p = posterior[k];
    if (static_cast<int>(k) == label) {
      total -= (1.0 - p) * std::log(std::max(p, kLogClamp));
    } else {
      total -= p * std::log(std::max(1.0 - p, kLogClamp));
    }
  }
  return total;
}

std::vector<double> MetricValues(NrMetric metric, const Matrix& posteriors,
                                 std::span<const int> labels) {
  CheckBatch(posteriors, labels);
  if (metric == NrMetric::kLoss) return PerSampleLosses(posteriors, labels);
  std::vector<double> out(labels.size());
  for (size_t i = 0; i < labels.size(); ++i) {
    out[i] = ModifiedEntropy(RowSpan(posteriors, static_cast<Eigen::Index>(i)),
                             labels[i]);
  }
  return out;
}

namespace {

std::vector<uint8_t> BelowThreshold(const std::vector<double>& values,
                                    double tau) {
  std::vector<uint8_t> out(values.size());
  for (size_t i = 0; i < values.size(); ++i) out[i] = values[i] < tau;
  return out;
}

}  // namespace

std::vector<uint8_t> NrMetricLossPredict(const Matrix& posteriors,
                                         std::span<const int> labels,
                                         double tau) {
  return BelowThreshold(MetricValues(NrMetric::kLoss, posteriors, labels),
                        tau);
}

std::vector<uint8_t> NrMetricModifiedEntropyPredict(
    const Matrix& posteriors, std::span<const int> labels, double tau) {
  return BelowThreshold(
      MetricValues(NrMetric::kModifiedEntropy, posteriors, labels), tau);
}

ThresholdCalibration CalibrateThreshold(
    std::span<const double> member_values,
    std::span<const double> nonmember_values) {
  if (member_values.empty() || nonmember_values.empty()) {
    throw Error(ErrorCode::kSize,
                "threshold calibration needs members and non-members");
  }
  std::vector<double> members(member_values.begin(), member_values.end());
  std::vector<double> nonmembers(nonmember_values.begin(),
                                 nonmember_values.end());
  for (double v : members) {
    if (!std::isfinite(v)) throw Error(ErrorCode::kInput, "non-finite metric");
  }
  for (double v : nonmembers) {
    if (!std::isfinite(v)) throw Error(ErrorCode::kInput, "non-finite metric");
  }
  std::sort(members.begin(), members.end());
  std::sort(nonmembers.begin(), nonmembers.end());

  std::vector<double> unique(members);
  unique.insert(unique.end(), nonmembers.begin(), nonmembers.end());
  std::sort(unique.begin(), unique.end());
  unique.erase(std::unique(unique.begin(), unique.end()), unique.end());

  std::vector<double> candidates;
  candidates.reserve(unique.size() + 1);
  candidates.push_back(unique.front());
  for (size_t i = 0; i + 1 < unique.size(); ++i) {
    candidates.push_back(unique[i] + (unique[i + 1] - unique[i]) / 2.0);
  }
  candidates.push_back(
      std::nextafter(unique.back(), std::numeric_limits<double>::infinity()));

  const double m = static_cast<double>(members.size());
  const double n = static_cast<double>(nonmembers.size());
  ThresholdCalibration best{candidates.front(), -1.0};
  for (double tau : candidates) {
    const auto tp = std::lower_bound(members.begin(), members.end(), tau) -
                    members.begin();
    const auto fp =
        std::lower_bound(nonmembers.begin(), nonmembers.end(), tau) -
        nonmembers.begin();
    const double ba = 0.5 * (static_cast<double>(tp) / m +
                             (n - static_cast<double>(fp)) / n);
    if (ba > best.balanced_accuracy) best = {tau, ba};
  }
  return best;
}

AttackData MakeAttackData(const TabularDataset& dataset,
                          const SplitPlan& split) {
  split.Validate(dataset.size());
  AttackData data;
  data.shadow.members = dataset.Subset(split.shadow_train);
  data.shadow.nonmembers = dataset.Subset(split.shadow_test);
  data.victim.members = dataset.Subset(split.victim_train);
  data.victim.nonmembers = dataset.Subset(split.victim_test);
  return data;
}

double AttackOutcome::BalancedAccuracy() const {
  return BalancedAccuracyFromPredictions(member_predictions,
                                         nonmember_predictions);
}

AttackOutcome OutcomeFromScores(AttackScoreSet scores, double threshold) {
  scores.Validate();
  AttackOutcome out;
  for (double s : scores.member_scores) {
    out.member_predictions.push_back(s >= threshold);
  }
  for (double s : scores.nonmember_scores) {
    out.nonmember_predictions.push_back(s >= threshold);
  }
  out.scores = std::move(scores);
  return out;
}

AttackOutcome ShuffleMembership(const AttackOutcome& outcome, uint64_t seed) {
  const size_t m = outcome.scores.member_scores.size();
  const size_t n = outcome.scores.nonmember_scores.size();
  if (outcome.member_predictions.size() != m ||
      outcome.nonmember_predictions.size() != n) {
    throw Error(ErrorCode::kShape, "scores and decisions differ in length");
  }
  std::vector<std::pair<double, uint8_t>> pool;
  pool.reserve(m + n);
  for (size_t i = 0; i < m; ++i) {
    pool.emplace_back(outcome.scores.member_scores[i],
                      outcome.member_predictions[i]);
  }
  for (size_t i = 0; i < n; ++i) {
    pool.emplace_back(outcome.scores.nonmember_scores[i],
                      outcome.nonmember_predictions[i]);
  }
  std::mt19937_64 rng(seed);
  std::shuffle(pool.begin(), pool.end(), rng);
  AttackOutcome out;
  for (size_t i = 0; i < pool.size(); ++i) {
    if (i < m) {
      out.scores.member_scores.push_back(pool[i].first);
      out.member_predictions.push_back(pool[i].second);
    } else {
      out.scores.nonmember_scores.push_back(pool[i].first);
      out.nonmember_predictions.push_back(pool[i].second);
    }
  }
  return out;
}

MetricAttackResult RunNrMetric(NrMetric metric, const FcnModel& shadow_model,
                               const FcnModel& victim_model,
                               const AttackData& data) {
  auto values = [&](const FcnModel& model, const TabularDataset& set) {
    return MetricValues(metric, Forward(model, set.features), set.labels);
  };
  MetricAttackResult result;
  result.calibration =
      CalibrateThreshold(values(shadow_model, data.shadow.members),
                         values(shadow_model, data.shadow.nonmembers));
  const double tau = result.calibration.tau;
  const std::vector<double> member = values(victim_model, data.victim.members);
  const std::vector<double> nonmember =
      values(victim_model, data.victim.nonmembers);
  AttackOutcome& out = result.outcome;
  for (double v : member) out.scores.member_scores.push_back(std::exp(-v));
  for (double v : nonmember) {
    out.scores.nonmember_scores.push_back(std::exp(-v));
  }
  out.member_predictions = BelowThreshold(member, tau);
  out.nonmember_predictions = BelowThreshold(nonmember, tau);
  return result;
}

TrainedAttackResult RunNrTrained(const FcnModel& shadow_model,
                                 const FcnModel& victim_model,
                                 const AttackData& data, bool with_label,
                                 MetaClassifierKind kind,
                                 const MetaHyperparameters& hyper,
                                 uint64_t seed) {
  auto features = [&](const FcnModel& model, const TabularDataset& set) {
    return BuildNrMetadataBatch(Forward(model, set.features), set.labels,
                                with_label);
  };
  const MetaDataset train =
      LabelledStack(features(shadow_model, data.shadow.members),
                    features(shadow_model, data.shadow.nonmembers));
  MetaClassifier classifier = MetaClassifier::Fit(kind, train, hyper, seed);
  AttackOutcome outcome =
      ScoreWith(classifier, features(victim_model, data.victim.members),
                features(victim_model, data.victim.nonmembers));
  return {std::move(classifier), std::move(outcome)};
}

namespace {

void CheckPair(const ModelPair& pair) {
  if (pair.original == nullptr || pair.compressed == nullptr) {
    throw Error(ErrorCode::kConfiguration,
                "single-reference attack needs original and compressed model");
  }
}

Matrix SrFeatures(const ModelPair& pair, const TabularDataset& set,
                  SrConstruction construction) {
  return BuildSrMetadataBatch(Forward(*pair.original, set.features),
                              Forward(*pair.compressed, set.features),
                              set.labels, construction);
}

}  // namespace

MetaDataset BuildSrTrainingData(const ModelPair& shadow,
                                const MembershipSets& shadow_sets,
                                SrConstruction construction) {
  CheckPair(shadow);
  return LabelledStack(SrFeatures(shadow, shadow_sets.members, construction),
                       SrFeatures(shadow, shadow_sets.nonmembers,
                                  construction));
}

TrainedAttackResult RunSr(const ModelPair& shadow, const ModelPair& victim,
                          const AttackData& data, SrConstruction construction,
                          MetaClassifierKind kind,
                          const MetaHyperparameters& hyper, uint64_t seed) {
  CheckPair(victim);
  const MetaDataset train =
      BuildSrTrainingData(shadow, data.shadow, construction);
  MetaClassifier classifier = MetaClassifier::Fit(kind, train, hyper, seed);
  AttackOutcome outcome = ScoreWith(
      classifier, SrFeatures(victim, data.victim.members, construction),
      SrFeatures(victim, data.victim.nonmembers, construction));
  return {std::move(classifier), std::move(outcome)};
}

std::string_view AdversaryName(Adversary adversary) {
  return adversary == Adversary::kAdversary1 ? "adv1" : "adv2";
}

void MrInput::Validate() const {
  ValidateMrModels(*this);
  if (adversary == Adversary::kAdversary1) {
    if (sr_classifiers.size() != compressed_models.size()) {
      throw Error(ErrorCode::kConfiguration,
                  fmt::format("adversary 1 needs one single-reference "
                              "classifier per model ({} vs {})",
                              sr_classifiers.size(),
                              compressed_models.size()));
    }
    for (const MetaClassifier* c : sr_classifiers) {
      if (c == nullptr) {
        throw Error(ErrorCode::kConfiguration,
                    "null single-reference classifier");
      }
    }
  }
}

Matrix MrPosteriorConcatBatch(const Matrix& samples,
                              std::span<const int> labels,
                              const MrInput& input) {
  input.Validate();
  CheckBatch(samples, labels);
  const size_t n = input.compressed_models.size();
  const Eigen::Index rows = samples.rows();
  if (input.adversary == Adversary::kAdversary1) {
    const Matrix p_original = Forward(*input.original, samples);
    Matrix out(rows, static_cast<Eigen::Index>(2 * n));
    for (size_t j = 0; j < n; ++j) {
      const Matrix p_compressed =
          Forward(input.compressed_models[j]->model, samples);
      const Vector score = input.sr_classifiers[j]->ScoreBatch(
          BuildSrMetadataBatch(p_original, p_compressed, labels,
                               input.construction));
      for (Eigen::Index i = 0; i < rows; ++i) {
        out(i, static_cast<Eigen::Index>(2 * j)) = 1.0 - score[i];
        out(i, static_cast<Eigen::Index>(2 * j + 1)) = score[i];
      }
    }
    return out;
  }
  Eigen::Index classes = 0;
  std::vector<Matrix> blocks;
  for (const CompressedModel* model : input.compressed_models) {
    blocks.push_back(Forward(model->model, samples));
    classes = blocks.back().cols();
  }
  Matrix out(rows, static_cast<Eigen::Index>(n) * classes);
  for (size_t j = 0; j < n; ++j) {
    out.middleCols(static_cast<Eigen::Index>(j) * classes, classes) =
        blocks[j];
  }
  return out;
}

std::vector<double> MrPosteriorConcat(std::span<const double> sample,
                                      int label, const MrInput& input) {
  Matrix row(1, static_cast<Eigen::Index>(sample.size()));
  std::copy(sample.begin(), sample.end(), row.data());
  const int labels[1] = {label};
  const Matrix out = MrPosteriorConcatBatch(row, labels, input);
  return std::vector<double>(out.data(), out.data() + out.size());
}

Matrix MrLossConcatBatch(
    const Matrix& samples, std::span<const int> labels,
    std::span<const CompressedModel* const> ordered_models) {
  CheckOrdered(ordered_models);
  CheckBatch(samples, labels);
  Matrix out(samples.rows(), static_cast<Eigen::Index>(ordered_models.size()));
  for (size_t j = 0; j < ordered_models.size(); ++j) {
    const std::vector<double> losses =
        PerSampleLosses(Forward(ordered_models[j]->model, samples), labels);
    for (Eigen::Index i = 0; i < samples.rows(); ++i) {
      out(i, static_cast<Eigen::Index>(j)) = losses[i];
    }
  }
  return out;
}

std::vector<double> MrLossConcat(
    std::span<const double> sample, int label,
    std::span<const CompressedModel* const> ordered_models) {
  Matrix row(1, static_cast<Eigen::Index>(sample.size()));
  std::copy(sample.begin(), sample.end(), row.data());
  const int labels[1] = {label};
  const Matrix out = MrLossConcatBatch(row, labels, ordered_models);
  return std::vector<double>(out.data(), out.data() + out.size());
}

Matrix MrFeatures(const Matrix& samples, std::span<const int> labels,
                  const MrInput& input) {
  const Matrix posterior = MrPosteriorConcatBatch(samples, labels, input);
  const Matrix loss =
      MrLossConcatBatch(samples, labels, input.compressed_models);
  Matrix out(samples.rows(), posterior.cols() + loss.cols());
  out << posterior, loss;
  return out;
}

int MrFeatureLength(const MrInput& input, int classes) {
  const int n = static_cast<int>(input.compressed_models.size());
  return (input.adversary == Adversary::kAdversary1 ? 2 : classes) * n + n;
}

namespace {

MetaDataset SelectRows(const MetaDataset& data,
                       const std::vector<size_t>& rows) {
  MetaDataset out;
  out.features.resize(static_cast<Eigen::Index>(rows.size()),
                      data.features.cols());
  for (size_t i = 0; i < rows.size(); ++i) {
    out.features.row(static_cast<Eigen::Index>(i)) =
        data.features.row(static_cast<Eigen::Index>(rows[i]));
    out.membership.push_back(data.membership[rows[i]]);
  }
  return out;
}

// Fold index per row, shuffled within each membership class so every fold
// keeps both labels.
std::vector<int> StratifiedFolds(std::span<const int> membership, int folds,
                                 uint64_t seed) {
  std::vector<int> fold(membership.size(), 0);
  std::mt19937_64 rng(seed);
  for (int label : {1, 0}) {
    std::vector<size_t> rows;
    for (size_t i = 0; i < membership.size(); ++i) {
      if (membership[i] == label) rows.push_back(i);
    }
    std::shuffle(rows.begin(), rows.end(), rng);
    for (size_t i = 0; i < rows.size(); ++i) {
      fold[rows[i]] = static_cast<int>(i % static_cast<size_t>(folds));
    }
  }
  return fold;
}

Matrix StackVertical(const Matrix& top, const Matrix& bottom) {
  Matrix out(top.rows() + bottom.rows(), top.cols());
  out.topRows(top.rows()) = top;
  out.bottomRows(bottom.rows()) = bottom;
  return out;
}

}  // namespace

MrResult RunMr(const MrInput& shadow, const MrInput& victim,
               const AttackData& data, const MrSettings& settings) {
  ValidateMrModels(shadow);
  ValidateMrModels(victim);
  if (shadow.adversary != victim.adversary ||
      shadow.compressed_models.size() != victim.compressed_models.size()) {
    throw Error(ErrorCode::kConfiguration,
                "shadow and victim multi-reference inputs do not match");
  }
  if (settings.cross_fit_folds == 1 || settings.cross_fit_folds < 0) {
    throw Error(ErrorCode::kConfiguration,
                fmt::format("cross-fit folds must be 0 or >= 2, got {}",
                            settings.cross_fit_folds));
  }
  const TabularDataset& members = data.shadow.members;
  const TabularDataset& nonmembers = data.shadow.nonmembers;
  const Matrix shadow_loss = StackVertical(
      MrLossConcatBatch(members.features, members.labels,
                        shadow.compressed_models),
      MrLossConcatBatch(nonmembers.features, nonmembers.labels,
                        shadow.compressed_models));

  MrInput victim_input = victim;
  std::vector<MetaClassifier> victim_sr;
  Matrix shadow_posterior;
  if (shadow.adversary == Adversary::kAdversary1) {
    const size_t n = shadow.compressed_models.size();
    std::vector<MetaDataset> sr_train;
    victim_sr.reserve(n);
    for (size_t j = 0; j < n; ++j) {
      sr_train.push_back(BuildSrTrainingData(
          {shadow.original, &shadow.compressed_models[j]->model}, data.shadow,
          shadow.construction));
      victim_sr.push_back(MetaClassifier::Fit(
          settings.sr_kind, sr_train.back(), settings.hyper,
          DeriveSeed(settings.seed, 2000 + j)));
    }
    victim_input.sr_classifiers.clear();
    for (const MetaClassifier& c : victim_sr) {
      victim_input.sr_classifiers.push_back(&c);
    }

    const Eigen::Index rows = sr_train.front().features.rows();
    shadow_posterior.resize(rows, static_cast<Eigen::Index>(2 * n));
    auto put = [&](size_t j, Eigen::Index row, double p) {
      shadow_posterior(row, static_cast<Eigen::Index>(2 * j)) = 1.0 - p;
      shadow_posterior(row, static_cast<Eigen::Index>(2 * j + 1)) = p;
    };
    if (settings.cross_fit_folds >= 2) {
      const int k = settings.cross_fit_folds;
      const std::vector<int> fold = StratifiedFolds(
          sr_train.front().membership, k, DeriveSeed(settings.seed, 3000));
      for (size_t j = 0; j < n; ++j) {
        for (int f = 0; f < k; ++f) {
          std::vector<size_t> fit_rows;
          std::vector<size_t> held_rows;
          for (size_t i = 0; i < fold.size(); ++i) {
            (fold[i] == f ? held_rows : fit_rows).push_back(i);
          }
          if (held_rows.empty()) continue;
          const MetaClassifier sr = MetaClassifier::Fit(
              settings.sr_kind, SelectRows(sr_train[j], fit_rows),
              settings.hyper,
              DeriveSeed(settings.seed, 4000 + j * static_cast<size_t>(k) +
                                            static_cast<size_t>(f)));
          const Vector p =
              sr.ScoreBatch(SelectRows(sr_train[j], held_rows).features);
          for (size_t i = 0; i < held_rows.size(); ++i) {
            put(j, static_cast<Eigen::Index>(held_rows[i]),
                std::clamp(p[static_cast<Eigen::Index>(i)], 0.0, 1.0));
          }
        }
      }
    } else {
      std::vector<MetaClassifier> fitted;
      fitted.reserve(n);
      for (size_t j = 0; j < n; ++j) {
        const MetaClassifier* sr = j < shadow.sr_classifiers.size()
                                       ? shadow.sr_classifiers[j]
                                       : nullptr;
        if (sr == nullptr) {
          fitted.push_back(MetaClassifier::Fit(
              settings.sr_kind, sr_train[j], settings.hyper,
              DeriveSeed(settings.seed, 1000 + j)));
          sr = &fitted.back();
        }
        const Vector p = sr->ScoreBatch(sr_train[j].features);
        for (Eigen::Index i = 0; i < rows; ++i) put(j, i, p[i]);
      }
    }
  } else {
    shadow_posterior = StackVertical(
        MrPosteriorConcatBatch(members.features, members.labels, shadow),
        MrPosteriorConcatBatch(nonmembers.features, nonmembers.labels,
                               shadow));
  }

  MetaDataset train;
  train.features.resize(shadow_posterior.rows(),
                        shadow_posterior.cols() + shadow_loss.cols());
  train.features << shadow_posterior, shadow_loss;
  train.membership.assign(members.size(), 1);
  train.membership.insert(train.membership.end(), nonmembers.size(), 0);
  MetaClassifier classifier = MetaClassifier::Fit(
      MetaClassifierKind::kMlp, train, settings.hyper, settings.seed);
  AttackOutcome outcome = ScoreWith(
      classifier,
      MrFeatures(data.victim.members.features, data.victim.members.labels,
                 victim_input),
      MrFeatures(data.victim.nonmembers.features,
                 data.victim.nonmembers.labels, victim_input));
  return {std::move(classifier), std::move(outcome), std::move(victim_sr)};
}

PosteriorShift MeanPosteriorKl(const FcnModel& original,
                               const FcnModel& compressed,
                               const MembershipSets& sets) {
  auto mean_kl = [&](const TabularDataset& set) {
    if (set.size() == 0) {
      throw Error(ErrorCode::kSize, "empty set for KL diagnostic");
    }
    const Matrix p = Forward(original, set.features);
    const Matrix q = Forward(compressed, set.features);
    double total = 0.0;
    for (Eigen::Index i = 0; i < p.rows(); ++i) {
      total += KlDivergence(RowSpan(p, i), RowSpan(q, i));
    }
    return total / static_cast<double>(p.rows());
  };
  return {mean_kl(sets.members), mean_kl(sets.nonmembers)};
}

void WriteMetaCsv(const std::filesystem::path& path, const MetaDataset& data) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream out(path);
  if (!out) {
    throw Error(ErrorCode::kIo,
                fmt::format("cannot write '{}'", path.string()));
  }
  for (Eigen::Index i = 0; i < data.features.rows(); ++i) {
    for (Eigen::Index j = 0; j < data.features.cols(); ++j) {
      out << fmt::format("{}", data.features(i, j)) << ',';
    }
    out << data.membership[static_cast<size_t>(i)] << '\n';
  }
  if (!out) {
    throw Error(ErrorCode::kIo,
                fmt::format("write to '{}' failed", path.string()));
  }
}

}  // namespace leakaudit
