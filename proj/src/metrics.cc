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

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include <fmt/format.h>

#include "leakaudit/error.h"

namespace leakaudit {
namespace {

constexpr double kClamp = 1e-12;

}  // namespace

void AttackScoreSet::Validate() const {
  if (member_scores.empty() || nonmember_scores.empty()) {
    throw Error(ErrorCode::kSize,
                "metrics need at least one member and one non-member score");
  }
  auto finite = [](double v) { return std::isfinite(v); };
  if (!std::all_of(member_scores.begin(), member_scores.end(), finite) ||
      !std::all_of(nonmember_scores.begin(), nonmember_scores.end(), finite)) {
    throw Error(ErrorCode::kInput, "non-finite attack score");
  }
}

double BalancedAccuracy(const AttackScoreSet& scores, double threshold) {
  scores.Validate();
  const auto tp = std::count_if(scores.member_scores.begin(),
                                scores.member_scores.end(),
                                [&](double s) { return s >= threshold; });
  const auto tn = std::count_if(scores.nonmember_scores.begin(),
                                scores.nonmember_scores.end(),
                                [&](double s) { return s < threshold; });
  const double tpr = static_cast<double>(tp) / scores.member_scores.size();
  const double tnr = static_cast<double>(tn) / scores.nonmember_scores.size();
  return 0.5 * (tpr + tnr);
}

double BalancedAccuracyFromPredictions(
    std::span<const uint8_t> member_preds,
    std::span<const uint8_t> nonmember_preds) {
  if (member_preds.empty() || nonmember_preds.empty()) {
    throw Error(ErrorCode::kSize, "empty prediction set");
  }
  const auto tp = std::count_if(member_preds.begin(), member_preds.end(),
                                [](uint8_t p) { return p != 0; });
  const auto tn = std::count(nonmember_preds.begin(), nonmember_preds.end(),
                             uint8_t{0});
  return 0.5 * (static_cast<double>(tp) / member_preds.size() +
                static_cast<double>(tn) / nonmember_preds.size());
}

RocCurve ComputeRoc(const AttackScoreSet& scores) {
  scores.Validate();
  struct Scored {
    double score;
    bool member;
  };
  std::vector<Scored> all;
  all.reserve(scores.member_scores.size() + scores.nonmember_scores.size());
  for (double s : scores.member_scores) all.push_back({s, true});
  for (double s : scores.nonmember_scores) all.push_back({s, false});
  std::sort(all.begin(), all.end(),
            [](const Scored& a, const Scored& b) { return a.score > b.score; });

  const double positives = static_cast<double>(scores.member_scores.size());
  const double negatives = static_cast<double>(scores.nonmember_scores.size());
  RocCurve curve;
  curve.push_back({0.0, 0.0, std::numeric_limits<double>::infinity()});
  size_t tp = 0;
  size_t fp = 0;
  for (size_t i = 0; i < all.size();) {
    const double threshold = all[i].score;
    while (i < all.size() && all[i].score == threshold) {
      (all[i].member ? tp : fp)++;
      ++i;
    }
    curve.push_back({fp / negatives, tp / positives, threshold});
  }
  curve.push_back({1.0, 1.0, -std::numeric_limits<double>::infinity()});
  return curve;
}

double IntegrateRoc(const RocCurve& curve) {
  double area = 0.0;
  for (size_t i = 1; i < curve.size(); ++i) {
    area += (curve[i].fpr - curve[i - 1].fpr) *
            (curve[i].tpr + curve[i - 1].tpr) * 0.5;
  }
  return area;
}

double RocAuc(const AttackScoreSet& scores) {
  scores.Validate();
  struct Scored {
    double score;
    bool member;
  };
  std::vector<Scored> all;
  for (double s : scores.member_scores) all.push_back({s, true});
  for (double s : scores.nonmember_scores) all.push_back({s, false});
  std::sort(all.begin(), all.end(),
            [](const Scored& a, const Scored& b) { return a.score < b.score; });
  // Sum of member mid-ranks (1-based).
  double rank_sum = 0.0;
  for (size_t i = 0; i < all.size();) {
    size_t j = i;
    size_t members = 0;
    while (j < all.size() && all[j].score == all[i].score) {
      members += all[j].member ? 1 : 0;
      ++j;
    }
    const double mid_rank = 0.5 * static_cast<double>(i + 1 + j);
    rank_sum += mid_rank * static_cast<double>(members);
    i = j;
  }
  const double m = static_cast<double>(scores.member_scores.size());
  const double n = static_cast<double>(scores.nonmember_scores.size());
  return (rank_sum - m * (m + 1) / 2) / (m * n);
}

TprAtFprResult TprAtFpr(const AttackScoreSet& scores, double fpr_cap) {
  if (!(fpr_cap >= 0.0 && fpr_cap <= 1.0)) {
    throw Error(ErrorCode::kConfiguration,
                fmt::format("FPR cap {} outside [0, 1]", fpr_cap));
  }
  TprAtFprResult result;
  for (const RocPoint& p : ComputeRoc(scores)) {
    if (p.fpr <= fpr_cap) result.tpr = std::max(result.tpr, p.tpr);
  }
  const double negatives = static_cast<double>(scores.nonmember_scores.size());
  result.small_sample = fpr_cap <= 0.0 || negatives * fpr_cap < 1.0;
  return result;
}

double KlDivergence(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) {
    throw Error(ErrorCode::kShape,
                fmt::format("KL arguments have lengths {} and {}", p.size(),
                            q.size()));
  }
  double kl = 0.0;
  for (size_t k = 0; k < p.size(); ++k) {
    const double pk = std::max(p[k], kClamp);
    const double qk = std::max(q[k], kClamp);
    kl += pk * std::log(pk / qk);
  }
  return kl;
}

void WriteRocCsv(const std::filesystem::path& path, const RocCurve& curve) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  out << "threshold,fpr,tpr\n";
  for (const auto& p : curve) {
    out << fmt::format("{},{},{}\n", p.threshold, p.fpr, p.tpr);
  }
}

}  // namespace leakaudit
