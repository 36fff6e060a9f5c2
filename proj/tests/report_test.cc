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

#include "leakaudit/report.h"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "leakaudit/error.h"

namespace leakaudit {
namespace {

AttackRow Row(int rep, std::string attack, std::string target, double ba) {
  AttackRow r;
  r.repetition = rep;
  r.seed = 1000 + static_cast<uint64_t>(rep);
  r.attack = std::move(attack);
  r.target = std::move(target);
  r.ok = true;
  r.balanced_accuracy = ba;
  r.auc = ba + 0.05;
  r.tpr_at_fpr = {{0.001, ba / 10, true}, {0.01, ba / 5, false}};
  r.null_balanced_accuracy = 0.5 + ba / 100;
  r.members = 100;
  r.nonmembers = 100;
  r.scores_file = "rep_" + std::to_string(rep) + "/attacks/x.outcome";
  return r;
}

AuditReport SampleReport() {
  AuditReport report;
  report.plan_hash = "0123456789abcdef";
  report.seed_base = 18446744073709551615ULL;
  report.repetitions = 3;
  report.repetition_seeds = {1, 2, 18446744073709551614ULL};
  report.models = {{0, "victim", "original", 1.0, 0.55},
                   {0, "victim", "prune60", 0.98, 0.56}};
  report.diagnostics = {{0, "prune60", 0.12, 0.08}};
  report.attacks = {Row(0, "nr_loss", "prune60", 0.6),
                    Row(1, "nr_loss", "prune60", 0.7),
                    Row(2, "nr_loss", "prune60", 0.65),
                    Row(0, "sr_sorted_concat_label_rf", "prune60", 0.8)};
  AttackRow failed;
  failed.repetition = 1;
  failed.attack = "sr_sorted_concat_label_rf";
  failed.target = "prune60";
  failed.error = "degenerate-data error: one class";
  report.attacks.push_back(failed);
  report.Aggregate();
  return report;
}

TEST(MedianTest, OddEvenAndEmpty) {
  EXPECT_DOUBLE_EQ(Median({3, 1, 2}), 2.0);
  EXPECT_DOUBLE_EQ(Median({4, 1, 3, 2}), 2.5);
  EXPECT_THROW(Median({}), Error);
}

TEST(ReportTest, AggregatesMediansOverSuccessfulCells) {
  const AuditReport report = SampleReport();
  ASSERT_EQ(report.aggregates.size(), 2u);
  EXPECT_EQ(report.aggregates[0].attack, "nr_loss");
  const AggregateRow* nr = report.FindAggregate("nr_loss", "prune60");
  ASSERT_NE(nr, nullptr);
  EXPECT_EQ(nr->cells, 3);
  EXPECT_EQ(nr->failed, 0);
  EXPECT_DOUBLE_EQ(nr->median_balanced_accuracy, 0.65);
  EXPECT_DOUBLE_EQ(nr->median_auc, 0.70);
  ASSERT_EQ(nr->median_tpr_at_fpr.size(), 2u);
  EXPECT_DOUBLE_EQ(nr->median_tpr_at_fpr[1].tpr, 0.13);
  EXPECT_TRUE(nr->median_tpr_at_fpr[0].small_sample);
  EXPECT_DOUBLE_EQ(*nr->median_null_balanced_accuracy, 0.5065);
  const AggregateRow* sr =
      report.FindAggregate("sr_sorted_concat_label_rf", "prune60");
  ASSERT_NE(sr, nullptr);
  EXPECT_EQ(sr->cells, 2);
  EXPECT_EQ(sr->failed, 1);
  EXPECT_DOUBLE_EQ(sr->median_balanced_accuracy, 0.8);
  EXPECT_EQ(report.FindAggregate("nr_loss", "prune90"), nullptr);
  EXPECT_EQ(report.Failures().size(), 1u);
  EXPECT_EQ(report.Cells(0).size(), 2u);
  EXPECT_EQ(report.Cells(1).size(), 1u);
}

TEST(ReportTest, JsonRoundTripIsExact) {
  const AuditReport report = SampleReport();
  const std::string json = report.ToJson();
  const AuditReport back = AuditReport::FromJson(json);
  EXPECT_EQ(back.ToJson(), json);
  EXPECT_EQ(back.seed_base, report.seed_base);
  EXPECT_EQ(back.repetition_seeds, report.repetition_seeds);
  ASSERT_EQ(back.attacks.size(), report.attacks.size());
  EXPECT_EQ(back.attacks[1].balanced_accuracy, 0.7);
  EXPECT_FALSE(back.attacks.back().ok);
  EXPECT_EQ(back.attacks.back().error, report.attacks.back().error);
  EXPECT_NE(json.find("\"schema_version\": 1"), std::string::npos);
  EXPECT_NE(json.find("\"status\": \"failed\""), std::string::npos);
}

TEST(ReportTest, RejectsUnknownSchemaVersion) {
  std::string json = SampleReport().ToJson();
  json.replace(json.find("\"schema_version\": 1"), 19,
               "\"schema_version\": 9");
  try {
    AuditReport::FromJson(json);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kSchema);
  }
  EXPECT_THROW(AuditReport::FromJson("{not json"), Error);
}

TEST(ReportTest, TextMentionsEveryAggregateAndFailure) {
  const std::string text = SampleReport().ToText();
  EXPECT_NE(text.find("nr_loss"), std::string::npos);
  EXPECT_NE(text.find("sr_sorted_concat_label_rf"), std::string::npos);
  EXPECT_NE(text.find("degenerate-data error"), std::string::npos);
  EXPECT_NE(text.find("0123456789abcdef"), std::string::npos);
}

TEST(ReportTest, WritesAllFiles) {
  const auto dir =
      std::filesystem::temp_directory_path() / "leakaudit_report_test";
  std::filesystem::remove_all(dir);
  const AuditReport report = SampleReport();
  report.WriteFiles(dir);
  for (const char* name : {"report.json", "report.txt", "attacks.csv",
                           "aggregates.csv", "models.csv"}) {
    EXPECT_TRUE(std::filesystem::exists(dir / name)) << name;
  }
  std::ifstream in(dir / "attacks.csv");
  std::string line;
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  // One line per (cell, FPR cap); cells without caps keep one line.
  int expected = 1;
  for (const AttackRow& r : report.attacks) {
    expected += std::max<int>(1, static_cast<int>(r.tpr_at_fpr.size()));
  }
  EXPECT_EQ(rows, expected);
  std::ifstream json(dir / "report.json");
  std::stringstream buffer;
  buffer << json.rdbuf();
  EXPECT_EQ(buffer.str(), report.ToJson());
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace leakaudit
