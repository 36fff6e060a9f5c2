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
#include <fstream>
#include <map>
#include <tuple>

#include <fmt/format.h>
#include <json.hpp>

#include "leakaudit/error.h"

namespace leakaudit {
namespace {

using Json = nlohmann::ordered_json;

Json TprJson(const std::vector<TprAtCap>& entries) {
  Json out = Json::array();
  for (const TprAtCap& e : entries) {
    out.push_back({{"fpr_cap", e.fpr_cap},
                   {"tpr", e.tpr},
                   {"small_sample", e.small_sample}});
  }
  return out;
}

std::vector<TprAtCap> TprFromJson(const Json& j) {
  std::vector<TprAtCap> out;
  for (const Json& e : j) {
    out.push_back({e.at("fpr_cap").get<double>(), e.at("tpr").get<double>(),
                   e.at("small_sample").get<bool>()});
  }
  return out;
}

Json Optional(const std::optional<double>& v) {
  return v ? Json(*v) : Json(nullptr);
}

std::optional<double> OptionalFrom(const Json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

void WriteText(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) {
    throw Error(ErrorCode::kIo,
                fmt::format("cannot write '{}'", path.string()));
  }
}

std::string CsvField(std::string_view s) {
  if (s.find_first_of(",\"\n") == std::string_view::npos) {
    return std::string(s);
  }
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

double Median(std::vector<double> values) {
  if (values.empty()) throw Error(ErrorCode::kSize, "median of empty list");
  std::sort(values.begin(), values.end());
  const size_t n = values.size();
  return n % 2 == 1 ? values[n / 2]
                    : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

void AuditReport::Aggregate() {
  std::map<std::pair<std::string, std::string>, std::vector<const AttackRow*>>
      groups;
  for (const AttackRow& row : attacks) {
    groups[{row.attack, row.target}].push_back(&row);
  }
  aggregates.clear();
  for (const auto& [key, rows] : groups) {
    AggregateRow agg;
    agg.attack = key.first;
    agg.target = key.second;
    agg.cells = static_cast<int>(rows.size());
    std::vector<double> ba, auc, null_ba;
    std::vector<std::vector<double>> tpr;
    std::vector<double> caps;
    std::vector<bool> small;
    for (const AttackRow* row : rows) {
      if (!row->ok) {
        ++agg.failed;
        continue;
      }
      ba.push_back(row->balanced_accuracy);
      auc.push_back(row->auc);
      if (row->null_balanced_accuracy) {
        null_ba.push_back(*row->null_balanced_accuracy);
      }
      if (tpr.empty()) {
        tpr.resize(row->tpr_at_fpr.size());
        small.assign(row->tpr_at_fpr.size(), false);
        for (const TprAtCap& e : row->tpr_at_fpr) caps.push_back(e.fpr_cap);
      }
      for (size_t k = 0; k < tpr.size() && k < row->tpr_at_fpr.size(); ++k) {
        tpr[k].push_back(row->tpr_at_fpr[k].tpr);
        small[k] = small[k] || row->tpr_at_fpr[k].small_sample;
      }
    }
    if (!ba.empty()) {
      agg.median_balanced_accuracy = Median(ba);
      agg.median_auc = Median(auc);
      for (size_t k = 0; k < tpr.size(); ++k) {
        agg.median_tpr_at_fpr.push_back({caps[k], Median(tpr[k]), small[k]});
      }
      if (!null_ba.empty()) agg.median_null_balanced_accuracy = Median(null_ba);
    }
    aggregates.push_back(std::move(agg));
  }
}

std::vector<const AttackRow*> AuditReport::Failures() const {
  std::vector<const AttackRow*> out;
  for (const AttackRow& row : attacks) {
    if (!row.ok) out.push_back(&row);
  }
  return out;
}

const AggregateRow* AuditReport::FindAggregate(std::string_view attack,
                                               std::string_view target) const {
  for (const AggregateRow& row : aggregates) {
    if (row.attack == attack && row.target == target) return &row;
  }
  return nullptr;
}

std::vector<const AttackRow*> AuditReport::Cells(int repetition) const {
  std::vector<const AttackRow*> out;
  for (const AttackRow& row : attacks) {
    if (row.ok && row.repetition == repetition) out.push_back(&row);
  }
  return out;
}

std::string AuditReport::ToJson() const {
  Json j;
  j["schema_version"] = schema_version;
  j["tool_version"] = tool_version;
  j["provenance"] = {{"plan_hash", plan_hash},
                     {"seed_base", seed_base},
                     {"repetitions", repetitions},
                     {"repetition_seeds", repetition_seeds}};
  Json models_json = Json::array();
  for (const ModelRow& m : models) {
    models_json.push_back({{"repetition", m.repetition},
                           {"role", m.role},
                           {"model", m.model},
                           {"train_accuracy", m.train_accuracy},
                           {"test_accuracy", m.test_accuracy},
                           {"overfitting_gap", m.overfitting_gap()}});
  }
  j["models"] = std::move(models_json);
  Json diag = Json::array();
  for (const DiagnosticRow& d : diagnostics) {
    diag.push_back({{"repetition", d.repetition},
                    {"target", d.target},
                    {"mean_kl_member", d.mean_kl_member},
                    {"mean_kl_nonmember", d.mean_kl_nonmember}});
  }
  j["diagnostics"] = std::move(diag);
  Json rows = Json::array();
  for (const AttackRow& r : attacks) {
    rows.push_back({{"repetition", r.repetition},
                    {"seed", r.seed},
                    {"attack", r.attack},
                    {"target", r.target},
                    {"status", r.ok ? "ok" : "failed"},
                    {"error", r.ok ? Json(nullptr) : Json(r.error)},
                    {"balanced_accuracy", r.balanced_accuracy},
                    {"auc", r.auc},
                    {"tpr_at_fpr", TprJson(r.tpr_at_fpr)},
                    {"null_balanced_accuracy",
                     Optional(r.null_balanced_accuracy)},
                    {"members", r.members},
                    {"nonmembers", r.nonmembers},
                    {"scores_file", r.scores_file}});
  }
  j["attacks"] = std::move(rows);
  Json aggs = Json::array();
  for (const AggregateRow& a : aggregates) {
    aggs.push_back({{"attack", a.attack},
                    {"target", a.target},
                    {"cells", a.cells},
                    {"failed", a.failed},
                    {"median_balanced_accuracy", a.median_balanced_accuracy},
                    {"median_auc", a.median_auc},
                    {"median_tpr_at_fpr", TprJson(a.median_tpr_at_fpr)},
                    {"median_null_balanced_accuracy",
                     Optional(a.median_null_balanced_accuracy)}});
  }
  j["aggregates"] = std::move(aggs);
  return j.dump(2) + "\n";
}

AuditReport AuditReport::FromJson(std::string_view text) {
  AuditReport report;
  try {
    const Json j = Json::parse(text);
    report.schema_version = j.at("schema_version").get<int>();
    if (report.schema_version != kReportSchemaVersion) {
      throw Error(ErrorCode::kSchema,
                  fmt::format("report schema version {} is not supported",
                              report.schema_version));
    }
    report.tool_version = j.at("tool_version").get<std::string>();
    const Json& prov = j.at("provenance");
    report.plan_hash = prov.at("plan_hash").get<std::string>();
    report.seed_base = prov.at("seed_base").get<uint64_t>();
    report.repetitions = prov.at("repetitions").get<int>();
    report.repetition_seeds =
        prov.at("repetition_seeds").get<std::vector<uint64_t>>();
    for (const Json& m : j.at("models")) {
      report.models.push_back({m.at("repetition").get<int>(),
                               m.at("role").get<std::string>(),
                               m.at("model").get<std::string>(),
                               m.at("train_accuracy").get<double>(),
                               m.at("test_accuracy").get<double>()});
    }
    for (const Json& d : j.at("diagnostics")) {
      report.diagnostics.push_back({d.at("repetition").get<int>(),
                                    d.at("target").get<std::string>(),
                                    d.at("mean_kl_member").get<double>(),
                                    d.at("mean_kl_nonmember").get<double>()});
    }
    for (const Json& r : j.at("attacks")) {
      AttackRow row;
      row.repetition = r.at("repetition").get<int>();
      row.seed = r.at("seed").get<uint64_t>();
      row.attack = r.at("attack").get<std::string>();
      row.target = r.at("target").get<std::string>();
      row.ok = r.at("status").get<std::string>() == "ok";
      if (!row.ok) row.error = r.at("error").get<std::string>();
      row.balanced_accuracy = r.at("balanced_accuracy").get<double>();
      row.auc = r.at("auc").get<double>();
      row.tpr_at_fpr = TprFromJson(r.at("tpr_at_fpr"));
      row.null_balanced_accuracy = OptionalFrom(r.at("null_balanced_accuracy"));
      row.members = r.at("members").get<uint64_t>();
      row.nonmembers = r.at("nonmembers").get<uint64_t>();
      row.scores_file = r.at("scores_file").get<std::string>();
      report.attacks.push_back(std::move(row));
    }
    for (const Json& a : j.at("aggregates")) {
      AggregateRow agg;
      agg.attack = a.at("attack").get<std::string>();
      agg.target = a.at("target").get<std::string>();
      agg.cells = a.at("cells").get<int>();
      agg.failed = a.at("failed").get<int>();
      agg.median_balanced_accuracy =
          a.at("median_balanced_accuracy").get<double>();
      agg.median_auc = a.at("median_auc").get<double>();
      agg.median_tpr_at_fpr = TprFromJson(a.at("median_tpr_at_fpr"));
      agg.median_null_balanced_accuracy =
          OptionalFrom(a.at("median_null_balanced_accuracy"));
      report.aggregates.push_back(std::move(agg));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, fmt::format("report JSON: {}", e.what()));
  }
  return report;
}

std::string AuditReport::ToText() const {
  std::string out;
  out += fmt::format("Audit report (schema {}, tool {})\n", schema_version,
                     tool_version);
  out += fmt::format("plan {}  seed base {}  repetitions {}\n\n", plan_hash,
                     seed_base, repetitions);

  out += "Models (median over repetitions)\n";
  std::map<std::pair<std::string, std::string>,
           std::tuple<std::vector<double>, std::vector<double>>>
      model_groups;
  for (const ModelRow& m : models) {
    auto& [train, test] = model_groups[{m.role, m.model}];
    train.push_back(m.train_accuracy);
    test.push_back(m.test_accuracy);
  }
  out += fmt::format("  {:<8} {:<12} {:>8} {:>8} {:>8}\n", "role", "model",
                     "train", "test", "gap");
  for (const auto& [key, accs] : model_groups) {
    const double train = Median(std::get<0>(accs));
    const double test = Median(std::get<1>(accs));
    out += fmt::format("  {:<8} {:<12} {:>8.4f} {:>8.4f} {:>8.4f}\n",
                       key.first, key.second, train, test, train - test);
  }

  out += "\nAttacks (median over successful repetitions)\n";
  out += fmt::format("  {:<34} {:<40} {:>6} {:>8} {:>8} {:>8}", "attack",
                     "target", "cells", "BA", "AUC", "null");
  std::vector<double> caps;
  if (!aggregates.empty()) {
    for (const TprAtCap& e : aggregates.front().median_tpr_at_fpr) {
      caps.push_back(e.fpr_cap);
    }
  }
  for (double cap : caps) out += fmt::format(" {:>12}", fmt::format("TPR@{}", cap));
  out += "\n";
  for (const AggregateRow& a : aggregates) {
    const std::string cells =
        a.failed ? fmt::format("{}/{}", a.cells - a.failed, a.cells)
                 : fmt::format("{}", a.cells);
    out += fmt::format("  {:<34} {:<40} {:>6} {:>8.4f} {:>8.4f} {:>8}",
                       a.attack, a.target, cells, a.median_balanced_accuracy,
                       a.median_auc,
                       a.median_null_balanced_accuracy
                           ? fmt::format("{:.4f}",
                                         *a.median_null_balanced_accuracy)
                           : std::string("-"));
    for (const TprAtCap& e : a.median_tpr_at_fpr) {
      out += fmt::format(" {:>12}", fmt::format("{:.4f}{}", e.tpr,
                                                e.small_sample ? "*" : ""));
    }
    out += "\n";
  }
  if (!caps.empty()) {
    out += "  * fewer non-members than 1/cap; value from the empirical curve\n";
  }

  if (!diagnostics.empty()) {
    out += "\nPosterior shift KL(original || compressed), median\n";
    std::map<std::string, std::pair<std::vector<double>, std::vector<double>>>
        kl;
    for (const DiagnosticRow& d : diagnostics) {
      kl[d.target].first.push_back(d.mean_kl_member);
      kl[d.target].second.push_back(d.mean_kl_nonmember);
    }
    out += fmt::format("  {:<12} {:>12} {:>12}\n", "target", "members",
                       "non-members");
    for (const auto& [target, v] : kl) {
      out += fmt::format("  {:<12} {:>12.6f} {:>12.6f}\n", target,
                         Median(v.first), Median(v.second));
    }
  }

  const auto failures = Failures();
  if (!failures.empty()) {
    out += fmt::format("\nFailed cells ({})\n", failures.size());
    for (const AttackRow* row : failures) {
      out += fmt::format("  rep {} {} on {}: {}\n", row->repetition,
                         row->attack, row->target, row->error);
    }
  }
  return out;
}

void AuditReport::WriteFiles(const std::filesystem::path& out_dir) const {
  std::filesystem::create_directories(out_dir);
  WriteText(out_dir / "report.json", ToJson());
  WriteText(out_dir / "report.txt", ToText());

  std::string attacks_csv =
      "repetition,seed,attack,target,status,balanced_accuracy,auc,"
      "null_balanced_accuracy,fpr_cap,tpr,small_sample,scores_file,error\n";
  for (const AttackRow& r : attacks) {
    const std::string null_ba =
        r.null_balanced_accuracy ? fmt::format("{}", *r.null_balanced_accuracy)
                                 : std::string();
    auto row_prefix = fmt::format("{},{},{},{},{},{},{},{}", r.repetition,
                                  r.seed, CsvField(r.attack),
                                  CsvField(r.target), r.ok ? "ok" : "failed",
                                  r.balanced_accuracy, r.auc, null_ba);
    if (r.tpr_at_fpr.empty()) {
      attacks_csv += fmt::format("{},,,,{},{}\n", row_prefix,
                                 CsvField(r.scores_file), CsvField(r.error));
    }
    for (const TprAtCap& e : r.tpr_at_fpr) {
      attacks_csv += fmt::format("{},{},{},{},{},{}\n", row_prefix, e.fpr_cap,
                                 e.tpr, e.small_sample ? 1 : 0,
                                 CsvField(r.scores_file), CsvField(r.error));
    }
  }
  WriteText(out_dir / "attacks.csv", attacks_csv);

  std::string agg_csv =
      "attack,target,cells,failed,median_balanced_accuracy,median_auc,"
      "median_null_balanced_accuracy\n";
  for (const AggregateRow& a : aggregates) {
    agg_csv += fmt::format(
        "{},{},{},{},{},{},{}\n", CsvField(a.attack), CsvField(a.target),
        a.cells, a.failed, a.median_balanced_accuracy, a.median_auc,
        a.median_null_balanced_accuracy
            ? fmt::format("{}", *a.median_null_balanced_accuracy)
            : std::string());
  }
  WriteText(out_dir / "aggregates.csv", agg_csv);

  std::string models_csv =
      "repetition,role,model,train_accuracy,test_accuracy,overfitting_gap\n";
  for (const ModelRow& m : models) {
    models_csv += fmt::format("{},{},{},{},{},{}\n", m.repetition, m.role,
                              m.model, m.train_accuracy, m.test_accuracy,
                              m.overfitting_gap());
  }
  WriteText(out_dir / "models.csv", models_csv);
}

}  // namespace leakaudit
