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

#ifndef LEAKAUDIT_PLAN_H_
#define LEAKAUDIT_PLAN_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "leakaudit/attacks.h"
#include "leakaudit/compression.h"
#include "leakaudit/data.h"
#include "leakaudit/meta_classifier.h"
#include "leakaudit/nn.h"

namespace leakaudit {

struct DatasetSpec {
  enum class Source { kSynthetic, kCsv };
  Source source = Source::kSynthetic;
  std::filesystem::path csv_path;  // resolved against the plan's directory
  CsvSchema csv;
  // For synthetic data the generator seed of repetition r is
  // DeriveSeed(synth.seed, r).
  SynthParams synth;
};

struct ModelSpec {
  std::vector<int> hidden = {256, 128};
  double dropout = 0.1;
};

struct CompressionSpec {
  std::vector<int> prune_percent;  // e.g. {60, 70, 80, 90}
  PruneScope prune_scope = PruneScope::kGlobal;
  std::vector<int> cluster_counts;  // e.g. {4, 8, 16}
  bool int8 = false;
  QuantMode int8_mode = QuantMode::kPostTraining;
  int finetune_epochs = 10;
  // Defaults to the training learning rate when unset.
  std::optional<double> finetune_learning_rate;
  // Fraction of the training set used for fine-tuning (N_f / N).
  double finetune_fraction = 1.0;

  // Names of every declared level in matrix order: "prune60", ...,
  // "int8", "cluster4", ...
  std::vector<std::string> LevelNames() const;
};

struct AttackSpec {
  std::vector<NrMetric> nr_metrics;
  std::vector<MetaClassifierKind> nr_classifiers;
  // Label variants run for every NR classifier.
  std::vector<bool> nr_with_label = {false, true};
  std::vector<SrConstruction> sr_constructions;
  std::vector<MetaClassifierKind> sr_classifiers;
  std::vector<Adversary> mr_adversaries;
  std::vector<std::string> mr_models;  // ascending degree
  SrConstruction mr_sr_construction = SrConstruction::kSortedConcatLabel;
  MetaClassifierKind mr_sr_classifier = MetaClassifierKind::kRandomForest;
  int mr_cross_fit_folds = 5;
  // Compression levels attacked by NR and SR; empty means all.
  std::vector<std::string> targets;
  // Also run NR attacks on the uncompressed model.
  bool nr_on_original = false;
  // Writes the shadow meta-records of every SR cell as CSV.
  bool export_features = false;
};

struct MetricSpec {
  std::vector<double> fpr_caps = {0.001, 0.01};
  bool kl_diagnostics = true;
  // Balanced accuracy after shuffling evaluation membership labels.
  bool null_check = true;
};

struct RunSpec {
  int repetitions = 5;
  uint64_t seed_base = 0;
  int workers = 1;
};

struct ExperimentPlan {
  DatasetSpec dataset;
  SplitSizes split;
  ModelSpec model;
  TrainConfig train;
  std::optional<DpConfig> dp;
  CompressionSpec compression;
  AttackSpec attacks;
  MetaHyperparameters meta;
  MetricSpec metrics;
  RunSpec run;

  // Throws kConfiguration for inconsistent settings and kOrdering for an
  // MR model list that is not in ascending degree within one family.
  void Validate() const;

  // Compression levels attacked by NR / SR (the declared targets or all).
  std::vector<std::string> TargetLevels() const;

  uint64_t RepetitionSeed(int repetition) const;

  // Normalized `key = value` text of every field; equal plans give equal
  // text.
  std::string CanonicalText() const;
  // 64-bit FNV-1a of CanonicalText(), 16 lowercase hex digits.
  std::string Hash() const;
};

uint64_t Fnv1a64(std::string_view text);

// INI-style text: `[section]` headers and `key = value` lines; `#` and `;`
// start comments. Unknown sections or keys are rejected (kParse). Relative
// CSV paths are resolved against `base_dir`.
ExperimentPlan ParsePlan(std::string_view text,
                         const std::filesystem::path& base_dir = {});
ExperimentPlan LoadPlan(const std::filesystem::path& path);

// Degree tag of a level name ("prune70" -> 70, "int8" -> 8,
// "cluster8" -> 248). Throws kConfiguration for an unknown name.
int LevelDegreeTag(std::string_view level);
CompressionKind LevelFamily(std::string_view level);

}  // namespace leakaudit

#endif  // LEAKAUDIT_PLAN_H_
