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

#ifndef LEAKAUDIT_REPORT_H_
#define LEAKAUDIT_REPORT_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace leakaudit {

inline constexpr int kReportSchemaVersion = 1;
inline constexpr std::string_view kToolVersion = "0.1.0";

struct TprAtCap {
  double fpr_cap = 0.0;
  double tpr = 0.0;
  bool small_sample = false;
};

// Accuracy of one trained model of one repetition.
struct ModelRow {
  int repetition = 0;
  std::string role;   // "victim" or "shadow"
  std::string model;  // "original" or a compression level
  double train_accuracy = 0.0;
  double test_accuracy = 0.0;

  double overfitting_gap() const { return train_accuracy - test_accuracy; }
};

// Mean KL(original || compressed) on the victim's members / non-members.
struct DiagnosticRow {
  int repetition = 0;
  std::string target;
  double mean_kl_member = 0.0;
  double mean_kl_nonmember = 0.0;
};

// One (attack, target, repetition) cell.
struct AttackRow {
  int repetition = 0;
  uint64_t seed = 0;
  std::string attack;
  std::string target;
  bool ok = false;
  std::string error;  // set when !ok
  double balanced_accuracy = 0.0;
  double auc = 0.0;
  std::vector<TprAtCap> tpr_at_fpr;
  std::optional<double> null_balanced_accuracy;
  uint64_t members = 0;
  uint64_t nonmembers = 0;
  // Relative to the run directory; the stored scores reproduce every
  // metric of the row.
  std::string scores_file;
};

struct AggregateRow {
  std::string attack;
  std::string target;
  int cells = 0;
  int failed = 0;
  double median_balanced_accuracy = 0.0;
  double median_auc = 0.0;
  std::vector<TprAtCap> median_tpr_at_fpr;
  std::optional<double> median_null_balanced_accuracy;
};

struct AuditReport {
  int schema_version = kReportSchemaVersion;
  std::string tool_version{kToolVersion};
  std::string plan_hash;
  uint64_t seed_base = 0;
  int repetitions = 0;
  std::vector<uint64_t> repetition_seeds;
  std::vector<ModelRow> models;
  std::vector<DiagnosticRow> diagnostics;
  std::vector<AttackRow> attacks;
  std::vector<AggregateRow> aggregates;

  // Rebuilds `aggregates` from `attacks` (medians over successful cells),
  // sorted by (attack, target).
  void Aggregate();

  std::vector<const AttackRow*> Failures() const;
  const AggregateRow* FindAggregate(std::string_view attack,
                                    std::string_view target) const;
  // Successful cells of one repetition.
  std::vector<const AttackRow*> Cells(int repetition) const;

  std::string ToJson() const;
  static AuditReport FromJson(std::string_view text);
  std::string ToText() const;

  // report.json, report.txt, attacks.csv, aggregates.csv, models.csv.
  void WriteFiles(const std::filesystem::path& out_dir) const;
};

// Median of a non-empty list; the mean of the two middle values for even
// sizes.
double Median(std::vector<double> values);

}  // namespace leakaudit

#endif  // LEAKAUDIT_REPORT_H_
