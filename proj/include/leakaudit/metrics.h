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

#ifndef LEAKAUDIT_METRICS_H_
#define LEAKAUDIT_METRICS_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace leakaudit {

// Attack scores for known members and non-members; larger means "more
// likely a member".
struct AttackScoreSet {
  std::vector<double> member_scores;
  std::vector<double> nonmember_scores;

  // Throws kInput on non-finite scores, kSize when either list is empty.
  void Validate() const;
};

// (TPR + TNR) / 2 with the rule score >= threshold -> member.
double BalancedAccuracy(const AttackScoreSet& scores, double threshold = 0.5);

// Same quantity from hard decisions (non-zero = predicted member).
double BalancedAccuracyFromPredictions(std::span<const uint8_t> member_preds,
                                       std::span<const uint8_t> nonmember_preds);

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
  double threshold = 0.0;  // predict member iff score >= threshold
};

// Empirical ROC from threshold +inf (0, 0) through every distinct score in
// descending order to -inf (1, 1). FPR and TPR are non-decreasing.
using RocCurve = std::vector<RocPoint>;
RocCurve ComputeRoc(const AttackScoreSet& scores);

// Area under a curve by joining consecutive points with straight segments;
// tied scores produce diagonal segments worth half credit.
double IntegrateRoc(const RocCurve& curve);

// Mann-Whitney statistic: P(member > non-member) + 0.5 P(tie), computed from
// mid-ranks.
double RocAuc(const AttackScoreSet& scores);

struct TprAtFprResult {
  double tpr = 0.0;
  // Fewer than 1/fpr_cap non-members.
  bool small_sample = false;
};

// Maximum TPR over thresholds whose FPR does not exceed `fpr_cap`; no
// interpolation between ROC points.
TprAtFprResult TprAtFpr(const AttackScoreSet& scores, double fpr_cap);

// sum_k p_k log(p_k / q_k) in nats, both arguments clamped at 1e-12.
double KlDivergence(std::span<const double> p, std::span<const double> q);

// CSV with header "threshold,fpr,tpr".
void WriteRocCsv(const std::filesystem::path& path, const RocCurve& curve);

}  // namespace leakaudit

#endif  // LEAKAUDIT_METRICS_H_
