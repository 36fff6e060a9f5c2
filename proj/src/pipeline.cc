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

#include "leakaudit/pipeline.h"

#include <algorithm>
#include <array>
#include <atomic>
#include <exception>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

#include <fmt/format.h>
#include <json.hpp>

#include "leakaudit/binary_io.h"
#include "leakaudit/error.h"
#include "leakaudit/metrics.h"

namespace leakaudit {
namespace {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

constexpr std::string_view kVictim = "victim";
constexpr std::string_view kShadow = "shadow";
constexpr std::string_view kOriginal = "original";

void WriteFile(const fs::path& path, std::string_view text) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) {
    throw Error(ErrorCode::kIo,
                fmt::format("cannot write '{}'", path.string()));
  }
}

std::string ReadFile(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::kIo, fmt::format("cannot read '{}'", path.string()));
  }
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

Json ReadJson(const fs::path& path) {
  try {
    return Json::parse(ReadFile(path));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse,
                fmt::format("'{}': {}", path.string(), e.what()));
  }
}

void RequireFile(Stage stage, Stage upstream, const fs::path& path) {
  if (!fs::exists(path)) {
    throw Error(ErrorCode::kDependency,
                fmt::format("stage '{}' needs the output of stage '{}': "
                            "missing {}",
                            StageName(stage), StageName(upstream),
                            path.string()));
  }
}

fs::path RunInfoPath(const fs::path& out) { return out / "run.json"; }
fs::path SplitPath(const fs::path& out, int rep) {
  return RepetitionDir(out, rep) / "split.bin";
}
fs::path TrainStatsPath(const fs::path& out, int rep) {
  return RepetitionDir(out, rep) / "train_stats.json";
}
fs::path CompressStatsPath(const fs::path& out, int rep) {
  return RepetitionDir(out, rep) / "compress_stats.json";
}
fs::path AttackIndexPath(const fs::path& out, int rep) {
  return RepetitionDir(out, rep) / "attacks" / "index.json";
}
fs::path EvaluationPath(const fs::path& out, int rep) {
  return RepetitionDir(out, rep) / "evaluation.json";
}

void WriteRunInfo(const ExperimentPlan& plan, const fs::path& out) {
  Json info = {{"plan_hash", plan.Hash()},
               {"seed_base", plan.run.seed_base},
               {"repetitions", plan.run.repetitions}};
  WriteFile(RunInfoPath(out), info.dump(2) + "\n");
  WriteFile(out / "plan.ini", plan.CanonicalText());
}

void CheckRunInfo(const ExperimentPlan& plan, const fs::path& out,
                  Stage stage) {
  RequireFile(stage, Stage::kTrain, RunInfoPath(out));
  const Json info = ReadJson(RunInfoPath(out));
  const std::string hash = info.value("plan_hash", "");
  const uint64_t seed_base = info.value("seed_base", uint64_t{0});
  if (hash != plan.Hash() || seed_base != plan.run.seed_base) {
    throw Error(ErrorCode::kDependency,
                fmt::format("stage '{}': {} holds a run of plan {} with seed "
                            "base {}, not plan {} with seed base {}; rerun "
                            "stage 'train'",
                            StageName(stage), out.string(), hash, seed_base,
                            plan.Hash(), plan.run.seed_base));
  }
}

TabularDataset LoadDataset(const ExperimentPlan& plan, int rep) {
  if (plan.dataset.source == DatasetSpec::Source::kSynthetic) {
    SynthParams params = plan.dataset.synth;
    params.seed = DeriveSeed(params.seed, static_cast<uint64_t>(rep));
    return SynthGenerate(params);
  }
  return LoadCsv(plan.dataset.csv_path, plan.dataset.csv);
}

void SaveSplit(const fs::path& path, const SplitPlan& split) {
  BinaryWriter out;
  out.WriteHeader(CheckpointKind::kSplit);
  out.WriteU64(split.seed);
  for (const auto* list :
       {&split.victim_train, &split.victim_test, &split.shadow_train,
        &split.shadow_test, &split.victim_valid, &split.shadow_valid}) {
    out.WriteU64(list->size());
    for (size_t i : *list) out.WriteU64(i);
  }
  fs::create_directories(path.parent_path());
  out.Save(path);
}

SplitPlan LoadSplit(const fs::path& path) {
  BinaryReader in = BinaryReader::FromFile(path);
  in.ReadHeader(CheckpointKind::kSplit);
  SplitPlan split;
  split.seed = in.ReadU64();
  for (auto* list :
       {&split.victim_train, &split.victim_test, &split.shadow_train,
        &split.shadow_test, &split.victim_valid, &split.shadow_valid}) {
    const uint64_t n = in.ReadU64();
    list->reserve(n);
    for (uint64_t i = 0; i < n; ++i) list->push_back(in.ReadU64());
  }
  if (!in.AtEnd()) {
    throw Error(ErrorCode::kParse,
                fmt::format("trailing bytes in '{}'", path.string()));
  }
  return split;
}

struct RepData {
  TabularDataset dataset;
  SplitPlan split;
  AttackData attack;
};

RepData LoadRepData(const ExperimentPlan& plan, const fs::path& out, int rep,
                    Stage stage) {
  RequireFile(stage, Stage::kTrain, SplitPath(out, rep));
  RepData data;
  data.dataset = LoadDataset(plan, rep);
  data.split = LoadSplit(SplitPath(out, rep));
  data.attack = MakeAttackData(data.dataset, data.split);
  return data;
}

const std::vector<size_t>& TrainRows(const SplitPlan& split,
                                     std::string_view role) {
  return role == kVictim ? split.victim_train : split.shadow_train;
}
const std::vector<size_t>& TestRows(const SplitPlan& split,
                                    std::string_view role) {
  return role == kVictim ? split.victim_test : split.shadow_test;
}
const std::vector<size_t>& ValidRows(const SplitPlan& split,
                                     std::string_view role) {
  return role == kVictim ? split.victim_valid : split.shadow_valid;
}

uint64_t RoleStream(std::string_view role) { return role == kVictim ? 0 : 1; }

Json ModelRowJson(const ModelRow& m) {
  return {{"repetition", m.repetition},
          {"role", m.role},
          {"model", m.model},
          {"train_accuracy", m.train_accuracy},
          {"test_accuracy", m.test_accuracy}};
}

ModelRow ModelRowFrom(const Json& j) {
  return {j.at("repetition").get<int>(), j.at("role").get<std::string>(),
          j.at("model").get<std::string>(),
          j.at("train_accuracy").get<double>(),
          j.at("test_accuracy").get<double>()};
}

void Log(const RunOptions& options, std::string_view message) {
  if (options.verbose) fmt::print(stderr, "[leakaudit] {}\n", message);
}

// ---------------------------------------------------------------------------
// train
// ---------------------------------------------------------------------------

void TrainStage(const ExperimentPlan& plan, const RunOptions& options,
                int workers) {
  const fs::path& out = options.out_dir;
  WriteRunInfo(plan, out);
  const int reps = plan.run.repetitions;
  std::vector<RepData> data(static_cast<size_t>(reps));
  for (int r = 0; r < reps; ++r) {
    RepData& d = data[static_cast<size_t>(r)];
    d.dataset = LoadDataset(plan, r);
    d.split = MakeSplit(d.dataset, plan.split,
                        DeriveSeed(plan.RepetitionSeed(r), 1));
    SaveSplit(SplitPath(out, r), d.split);
  }
  const std::string_view roles[] = {kVictim, kShadow};
  std::vector<ModelRow> stats(static_cast<size_t>(reps) * 2);
  ParallelFor(stats.size(), workers, [&](size_t job) {
    const int r = static_cast<int>(job / 2);
    const std::string_view role = roles[job % 2];
    const RepData& d = data[static_cast<size_t>(r)];
    const uint64_t seed =
        DeriveSeed(plan.RepetitionSeed(r), 10 + RoleStream(role));
    const TabularDataset train_set = d.dataset.Subset(TrainRows(d.split, role));
    const TabularDataset test_set = d.dataset.Subset(TestRows(d.split, role));
    std::vector<int> sizes = {d.dataset.feature_dim()};
    sizes.insert(sizes.end(), plan.model.hidden.begin(),
                 plan.model.hidden.end());
    sizes.push_back(d.dataset.class_count);
    const FcnModel init =
        FcnModel::Create(sizes, plan.model.dropout, DeriveSeed(seed, 0));
    TrainConfig config = plan.train;
    config.seed = DeriveSeed(seed, 1);
    FcnModel model;
    if (plan.dp) {
      model = TrainDpSgd(init, train_set, config, *plan.dp);
    } else {
      const std::vector<size_t>& valid_rows = ValidRows(d.split, role);
      model = Train(init, train_set,
                    valid_rows.empty() ? train_set
                                       : d.dataset.Subset(valid_rows),
                    config);
    }
    SaveFcnModel(ModelPath(out, r, role, kOriginal), model);
    stats[job] = {r, std::string(role), std::string(kOriginal),
                  Accuracy(model, train_set), Accuracy(model, test_set)};
    Log(options, fmt::format("train rep {} {}: train {:.4f} test {:.4f}", r,
                             role, stats[job].train_accuracy,
                             stats[job].test_accuracy));
  });
  for (int r = 0; r < reps; ++r) {
    Json rows = Json::array();
    rows.push_back(ModelRowJson(stats[static_cast<size_t>(r) * 2]));
    rows.push_back(ModelRowJson(stats[static_cast<size_t>(r) * 2 + 1]));
    WriteFile(TrainStatsPath(out, r), rows.dump(2) + "\n");
  }
}

// ---------------------------------------------------------------------------
// compress
// ---------------------------------------------------------------------------

CompressedModel CompressLevel(const ExperimentPlan& plan,
                              const FcnModel& original,
                              const std::string& level,
                              const TabularDataset& finetune_set,
                              uint64_t seed) {
  const CompressionSpec& spec = plan.compression;
  TrainConfig config = plan.train;
  config.max_epochs = spec.finetune_epochs;
  config.learning_rate =
      spec.finetune_learning_rate.value_or(plan.train.learning_rate);
  config.early_stop_patience = 0;
  config.seed = DeriveSeed(seed, 1);
  const DpConfig* dp = plan.dp ? &*plan.dp : nullptr;
  auto finetune = [&](const CompressedModel& cm) {
    if (spec.finetune_epochs == 0) return cm;
    return FinetuneCompressed(cm, finetune_set, finetune_set, config, dp);
  };
  const CompressionKind family = LevelFamily(level);
  if (family == CompressionKind::kPruneMask) {
    const double sparsity = LevelDegreeTag(level) / 100.0;
    return finetune(PruneL1(original, sparsity, spec.prune_scope));
  }
  if (family == CompressionKind::kClusterAssignment) {
    const int n = std::stoi(level.substr(std::string_view("cluster").size()));
    return finetune(ClusterWeights(original, n, DeriveSeed(seed, 2)));
  }
  if (spec.int8_mode == QuantMode::kPostTraining || spec.finetune_epochs == 0) {
    return QuantizeInt8(original, QuantMode::kPostTraining);
  }
  QatSettings qat;
  qat.train_set = &finetune_set;
  qat.valid_set = &finetune_set;
  qat.config = config;
  qat.dp = dp;
  return QuantizeInt8(original, QuantMode::kQuantAwareTraining, qat);
}

void CompressStage(const ExperimentPlan& plan, const RunOptions& options,
                   int workers) {
  const fs::path& out = options.out_dir;
  CheckRunInfo(plan, out, Stage::kCompress);
  const int reps = plan.run.repetitions;
  const std::vector<std::string> levels = plan.compression.LevelNames();
  const std::string_view roles[] = {kVictim, kShadow};
  std::vector<RepData> data;
  std::vector<std::array<FcnModel, 2>> originals;
  for (int r = 0; r < reps; ++r) {
    data.push_back(LoadRepData(plan, out, r, Stage::kCompress));
    std::array<FcnModel, 2> models;
    for (size_t k = 0; k < 2; ++k) {
      const fs::path path = ModelPath(out, r, roles[k], kOriginal);
      RequireFile(Stage::kCompress, Stage::kTrain, path);
      models[k] = LoadFcnModel(path);
    }
    originals.push_back(std::move(models));
  }
  const size_t per_rep = levels.size() * 2;
  std::vector<ModelRow> stats(static_cast<size_t>(reps) * per_rep);
  ParallelFor(stats.size(), workers, [&](size_t job) {
    const int r = static_cast<int>(job / per_rep);
    const size_t level_index = (job % per_rep) / 2;
    const size_t role_index = job % 2;
    const std::string& level = levels[level_index];
    const std::string_view role = roles[role_index];
    const RepData& d = data[static_cast<size_t>(r)];
    const uint64_t seed = DeriveSeed(
        plan.RepetitionSeed(r),
        Fnv1a64(fmt::format("compress/{}/{}", role, level)));
    const std::vector<size_t>& train_rows = TrainRows(d.split, role);
    const FinetunePlan ft = MakeFinetunePlan(
        train_rows, plan.compression.finetune_fraction,
        DeriveSeed(plan.RepetitionSeed(r), 30 + RoleStream(role)));
    const TabularDataset finetune_set = d.dataset.Subset(ft.finetune);
    const CompressedModel cm =
        CompressLevel(plan, originals[static_cast<size_t>(r)][role_index],
                      level, finetune_set, seed);
    cm.constraint.Check(cm.model);
    SaveCompressedModel(ModelPath(out, r, role, level), cm);
    stats[job] = {r, std::string(role), level,
                  Accuracy(cm.model, d.dataset.Subset(train_rows)),
                  Accuracy(cm.model, d.dataset.Subset(TestRows(d.split, role)))};
    Log(options, fmt::format("compress rep {} {} {}: train {:.4f} test {:.4f}",
                             r, role, level, stats[job].train_accuracy,
                             stats[job].test_accuracy));
  });
  for (int r = 0; r < reps; ++r) {
    Json rows = Json::array();
    for (size_t k = 0; k < per_rep; ++k) {
      rows.push_back(
          ModelRowJson(stats[static_cast<size_t>(r) * per_rep + k]));
    }
    WriteFile(CompressStatsPath(out, r), rows.dump(2) + "\n");
  }
}

// ---------------------------------------------------------------------------
// attack
// ---------------------------------------------------------------------------

enum class CellKind { kNrMetric, kNrTrained, kSr, kMr };

struct Cell {
  int repetition = 0;
  CellKind kind = CellKind::kNrMetric;
  std::string attack;
  std::string target;
  NrMetric metric = NrMetric::kLoss;
  MetaClassifierKind classifier = MetaClassifierKind::kRandomForest;
  bool with_label = false;
  SrConstruction construction = SrConstruction::kSortedConcatLabel;
  Adversary adversary = Adversary::kAdversary1;
  uint64_t seed = 0;

  std::string FileStem() const { return fmt::format("{}__{}", attack, target); }
};

std::string MrTarget(const ExperimentPlan& plan) {
  std::string out;
  for (const std::string& m : plan.attacks.mr_models) {
    if (!out.empty()) out += '+';
    out += m;
  }
  return out;
}

std::vector<Cell> PlanCells(const ExperimentPlan& plan, int rep) {
  const AttackSpec& a = plan.attacks;
  std::vector<Cell> cells;
  auto add = [&](Cell cell) {
    cell.repetition = rep;
    cell.seed = DeriveSeed(plan.RepetitionSeed(rep),
                           Fnv1a64(cell.attack + "@" + cell.target));
    cells.push_back(std::move(cell));
  };
  std::vector<std::string> nr_targets;
  if (a.nr_on_original) nr_targets.emplace_back(kOriginal);
  const std::vector<std::string> levels = plan.TargetLevels();
  nr_targets.insert(nr_targets.end(), levels.begin(), levels.end());
  for (const std::string& target : nr_targets) {
    for (NrMetric m : a.nr_metrics) {
      Cell c;
      c.kind = CellKind::kNrMetric;
      c.metric = m;
      c.attack = fmt::format("nr_{}", NrMetricName(m));
      c.target = target;
      add(std::move(c));
    }
    for (MetaClassifierKind k : a.nr_classifiers) {
      for (bool with_label : a.nr_with_label) {
        Cell c;
        c.kind = CellKind::kNrTrained;
        c.classifier = k;
        c.with_label = with_label;
        c.attack = fmt::format("nr_{}{}", MetaClassifierKindName(k),
                               with_label ? "_label" : "");
        c.target = target;
        add(std::move(c));
      }
    }
  }
  for (const std::string& target : levels) {
    for (SrConstruction s : a.sr_constructions) {
      for (MetaClassifierKind k : a.sr_classifiers) {
        Cell c;
        c.kind = CellKind::kSr;
        c.construction = s;
        c.classifier = k;
        c.attack = fmt::format("sr_{}_{}", SrConstructionName(s),
                               MetaClassifierKindName(k));
        c.target = target;
        add(std::move(c));
      }
    }
  }
  for (Adversary adv : a.mr_adversaries) {
    Cell c;
    c.kind = CellKind::kMr;
    c.adversary = adv;
    c.attack = fmt::format("mr_{}", AdversaryName(adv));
    c.target = MrTarget(plan);
    add(std::move(c));
  }
  return cells;
}

// Models of one repetition, loaded once and shared read-only by cells.
struct RepModels {
  std::map<std::string, FcnModel, std::less<>> originals;  // by role
  std::map<std::string, CompressedModel, std::less<>> compressed;  // role/level

  const FcnModel& Original(std::string_view role) const {
    return originals.find(role)->second;
  }
  const CompressedModel& Compressed(std::string_view role,
                                    std::string_view level) const {
    auto it = compressed.find(fmt::format("{}/{}", role, level));
    if (it == compressed.end()) {
      throw Error(ErrorCode::kConfiguration,
                  fmt::format("no compressed model '{}'", level));
    }
    return it->second;
  }
  const FcnModel& Model(std::string_view role, std::string_view target) const {
    return target == kOriginal ? Original(role)
                               : Compressed(role, target).model;
  }
};

AttackOutcome RunCell(const ExperimentPlan& plan, const Cell& cell,
                      const RepModels& models, const AttackData& data,
                      const fs::path& feature_dir) {
  switch (cell.kind) {
    case CellKind::kNrMetric:
      return RunNrMetric(cell.metric, models.Model(kShadow, cell.target),
                         models.Model(kVictim, cell.target), data)
          .outcome;
    case CellKind::kNrTrained:
      return RunNrTrained(models.Model(kShadow, cell.target),
                          models.Model(kVictim, cell.target), data,
                          cell.with_label, cell.classifier, plan.meta,
                          cell.seed)
          .outcome;
    case CellKind::kSr: {
      const ModelPair shadow{&models.Original(kShadow),
                             &models.Compressed(kShadow, cell.target).model};
      const ModelPair victim{&models.Original(kVictim),
                             &models.Compressed(kVictim, cell.target).model};
      if (plan.attacks.export_features) {
        WriteMetaCsv(feature_dir / (cell.FileStem() + ".csv"),
                     BuildSrTrainingData(shadow, data.shadow,
                                         cell.construction));
      }
      return RunSr(shadow, victim, data, cell.construction, cell.classifier,
                   plan.meta, cell.seed)
          .outcome;
    }
    case CellKind::kMr: {
      MrInput shadow;
      MrInput victim;
      for (auto [input, role] :
           {std::pair{&shadow, kShadow}, std::pair{&victim, kVictim}}) {
        input->adversary = cell.adversary;
        input->construction = plan.attacks.mr_sr_construction;
        input->original = &models.Original(role);
        for (const std::string& level : plan.attacks.mr_models) {
          input->compressed_models.push_back(&models.Compressed(role, level));
        }
      }
      MrSettings settings;
      settings.sr_kind = plan.attacks.mr_sr_classifier;
      settings.hyper = plan.meta;
      settings.seed = cell.seed;
      settings.cross_fit_folds = plan.attacks.mr_cross_fit_folds;
      return RunMr(shadow, victim, data, settings).outcome;
    }
  }
  throw Error(ErrorCode::kConfiguration, "unknown attack cell");
}

std::vector<std::string> AttackedLevels(const ExperimentPlan& plan) {
  std::vector<std::string> levels = plan.TargetLevels();
  for (const std::string& m : plan.attacks.mr_models) {
    if (!plan.attacks.mr_adversaries.empty() &&
        std::find(levels.begin(), levels.end(), m) == levels.end()) {
      levels.push_back(m);
    }
  }
  return levels;
}

std::vector<std::string> AttackStage(const ExperimentPlan& plan,
                                     const RunOptions& options, int workers) {
  const fs::path& out = options.out_dir;
  CheckRunInfo(plan, out, Stage::kAttack);
  const int reps = plan.run.repetitions;
  std::vector<RepData> data;
  std::vector<RepModels> models(static_cast<size_t>(reps));
  std::vector<Cell> cells;
  for (int r = 0; r < reps; ++r) {
    data.push_back(LoadRepData(plan, out, r, Stage::kAttack));
    RepModels& m = models[static_cast<size_t>(r)];
    for (std::string_view role : {kVictim, kShadow}) {
      const fs::path path = ModelPath(out, r, role, kOriginal);
      RequireFile(Stage::kAttack, Stage::kTrain, path);
      m.originals.emplace(std::string(role), LoadFcnModel(path));
      for (const std::string& level : AttackedLevels(plan)) {
        const fs::path cpath = ModelPath(out, r, role, level);
        RequireFile(Stage::kAttack, Stage::kCompress, cpath);
        m.compressed.emplace(fmt::format("{}/{}", role, level),
                             LoadCompressedModel(cpath));
      }
    }
    const std::vector<Cell> rep_cells = PlanCells(plan, r);
    cells.insert(cells.end(), rep_cells.begin(), rep_cells.end());
  }

  std::vector<std::string> errors(cells.size());
  ParallelFor(cells.size(), workers, [&](size_t i) {
    const Cell& cell = cells[i];
    const fs::path dir = RepetitionDir(out, cell.repetition) / "attacks";
    const fs::path path = dir / (cell.FileStem() + ".outcome");
    try {
      const AttackOutcome outcome =
          RunCell(plan, cell, models[static_cast<size_t>(cell.repetition)],
                  data[static_cast<size_t>(cell.repetition)].attack,
                  RepetitionDir(out, cell.repetition) / "features");
      fs::create_directories(dir);
      SaveAttackOutcome(path, outcome);
      Log(options, fmt::format("attack rep {} {} on {}: BA {:.4f}",
                               cell.repetition, cell.attack, cell.target,
                               outcome.BalancedAccuracy()));
    } catch (const std::exception& e) {
      errors[i] = e.what();
      std::error_code ignored;
      fs::remove(path, ignored);
      Log(options, fmt::format("attack rep {} {} on {} failed: {}",
                               cell.repetition, cell.attack, cell.target,
                               e.what()));
    }
  });

  std::vector<std::string> failures;
  for (int r = 0; r < reps; ++r) {
    Json index = Json::array();
    for (size_t i = 0; i < cells.size(); ++i) {
      const Cell& c = cells[i];
      if (c.repetition != r) continue;
      const bool ok = errors[i].empty();
      index.push_back(
          {{"attack", c.attack},
           {"target", c.target},
           {"seed", c.seed},
           {"status", ok ? "ok" : "failed"},
           {"error", ok ? Json(nullptr) : Json(errors[i])},
           {"scores_file",
            ok ? (fs::path(fmt::format("rep_{}", r)) / "attacks" /
                  (c.FileStem() + ".outcome"))
                     .generic_string()
               : std::string()}});
      if (!ok) {
        failures.push_back(fmt::format("rep {} {} on {}: {}", r, c.attack,
                                       c.target, errors[i]));
      }
    }
    WriteFile(AttackIndexPath(out, r), index.dump(2) + "\n");
  }
  return failures;
}

// ---------------------------------------------------------------------------
// evaluate
// ---------------------------------------------------------------------------

std::vector<std::string> EvaluateStage(const ExperimentPlan& plan,
                                       const RunOptions& options,
                                       int workers) {
  const fs::path& out = options.out_dir;
  CheckRunInfo(plan, out, Stage::kEvaluate);
  std::vector<std::string> failures;
  for (int r = 0; r < plan.run.repetitions; ++r) {
    RequireFile(Stage::kEvaluate, Stage::kAttack, AttackIndexPath(out, r));
    RequireFile(Stage::kEvaluate, Stage::kTrain, TrainStatsPath(out, r));
    RequireFile(Stage::kEvaluate, Stage::kCompress, CompressStatsPath(out, r));
    const Json index = ReadJson(AttackIndexPath(out, r));

    AuditReport partial;
    for (const Json& row : ReadJson(TrainStatsPath(out, r))) {
      partial.models.push_back(ModelRowFrom(row));
    }
    for (const Json& row : ReadJson(CompressStatsPath(out, r))) {
      partial.models.push_back(ModelRowFrom(row));
    }

    std::vector<AttackRow> rows(index.size());
    ParallelFor(index.size(), workers, [&](size_t i) {
      const Json& entry = index[i];
      AttackRow& row = rows[i];
      row.repetition = r;
      row.seed = entry.at("seed").get<uint64_t>();
      row.attack = entry.at("attack").get<std::string>();
      row.target = entry.at("target").get<std::string>();
      row.ok = entry.at("status").get<std::string>() == "ok";
      if (!row.ok) {
        row.error = entry.at("error").get<std::string>();
        return;
      }
      row.scores_file = entry.at("scores_file").get<std::string>();
      const fs::path scores_path = out / row.scores_file;
      RequireFile(Stage::kEvaluate, Stage::kAttack, scores_path);
      const AttackOutcome outcome = LoadAttackOutcome(scores_path);
      row.members = outcome.scores.member_scores.size();
      row.nonmembers = outcome.scores.nonmember_scores.size();
      row.balanced_accuracy = outcome.BalancedAccuracy();
      row.auc = RocAuc(outcome.scores);
      for (double cap : plan.metrics.fpr_caps) {
        const TprAtFprResult t = TprAtFpr(outcome.scores, cap);
        row.tpr_at_fpr.push_back({cap, t.tpr, t.small_sample});
      }
      if (plan.metrics.null_check) {
        row.null_balanced_accuracy =
            ShuffleMembership(outcome, DeriveSeed(row.seed, 0x6e756c6c))
                .BalancedAccuracy();
      }
      WriteRocCsv(RepetitionDir(out, r) / "roc" /
                      fmt::format("{}__{}.csv", row.attack, row.target),
                  ComputeRoc(outcome.scores));
    });
    for (AttackRow& row : rows) {
      if (!row.ok) {
        failures.push_back(fmt::format("rep {} {} on {}: {}", r, row.attack,
                                       row.target, row.error));
      }
      partial.attacks.push_back(std::move(row));
    }

    if (plan.metrics.kl_diagnostics &&
        !plan.compression.LevelNames().empty()) {
      const RepData d = LoadRepData(plan, out, r, Stage::kEvaluate);
      const fs::path opath = ModelPath(out, r, kVictim, kOriginal);
      RequireFile(Stage::kEvaluate, Stage::kTrain, opath);
      const FcnModel original = LoadFcnModel(opath);
      for (const std::string& level : plan.compression.LevelNames()) {
        const fs::path cpath = ModelPath(out, r, kVictim, level);
        RequireFile(Stage::kEvaluate, Stage::kCompress, cpath);
        const PosteriorShift shift = MeanPosteriorKl(
            original, LoadCompressedModel(cpath).model, d.attack.victim);
        partial.diagnostics.push_back(
            {r, level, shift.mean_member_kl, shift.mean_nonmember_kl});
      }
    }
    WriteFile(EvaluationPath(out, r), partial.ToJson());
    Log(options, fmt::format("evaluate rep {}: {} cells", r, rows.size()));
  }
  return failures;
}

// ---------------------------------------------------------------------------
// report
// ---------------------------------------------------------------------------

AuditReport ReportStage(const ExperimentPlan& plan, const RunOptions& options) {
  const fs::path& out = options.out_dir;
  CheckRunInfo(plan, out, Stage::kReport);
  AuditReport report;
  report.plan_hash = plan.Hash();
  report.seed_base = plan.run.seed_base;
  report.repetitions = plan.run.repetitions;
  for (int r = 0; r < plan.run.repetitions; ++r) {
    report.repetition_seeds.push_back(plan.RepetitionSeed(r));
    RequireFile(Stage::kReport, Stage::kEvaluate, EvaluationPath(out, r));
    AuditReport partial = AuditReport::FromJson(ReadFile(EvaluationPath(out, r)));
    for (auto& m : partial.models) report.models.push_back(std::move(m));
    for (auto& d : partial.diagnostics) {
      report.diagnostics.push_back(std::move(d));
    }
    for (auto& a : partial.attacks) report.attacks.push_back(std::move(a));
  }
  report.Aggregate();
  report.WriteFiles(out);
  Log(options, fmt::format("report written to {}", out.string()));
  return report;
}

}  // namespace

std::string_view StageName(Stage stage) {
  switch (stage) {
    case Stage::kTrain:
      return "train";
    case Stage::kCompress:
      return "compress";
    case Stage::kAttack:
      return "attack";
    case Stage::kEvaluate:
      return "evaluate";
    case Stage::kReport:
      return "report";
  }
  return "unknown";
}

Stage ParseStage(std::string_view name) {
  for (Stage s : kAllStages) {
    if (StageName(s) == name) return s;
  }
  throw Error(ErrorCode::kConfiguration,
              fmt::format("unknown stage '{}' (expected train, compress, "
                          "attack, evaluate or report)",
                          name));
}

void ParallelFor(size_t n, int workers,
                 const std::function<void(size_t)>& fn) {
  std::vector<std::exception_ptr> errors(n);
  const size_t threads =
      std::min(n, static_cast<size_t>(std::max(workers, 1)));
  if (threads <= 1) {
    for (size_t i = 0; i < n; ++i) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  } else {
    std::atomic<size_t> next{0};
    std::vector<std::thread> pool;
    for (size_t t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (size_t i = next++; i < n; i = next++) {
          try {
            fn(i);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
    }
    for (std::thread& t : pool) t.join();
  }
  for (const std::exception_ptr& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

fs::path RepetitionDir(const fs::path& out_dir, int repetition) {
  return out_dir / fmt::format("rep_{}", repetition);
}

fs::path ModelPath(const fs::path& out_dir, int repetition,
                   std::string_view role, std::string_view model) {
  return RepetitionDir(out_dir, repetition) / "models" /
         fmt::format("{}_{}.ckpt", role, model);
}

void SaveAttackOutcome(const fs::path& path, const AttackOutcome& outcome) {
  BinaryWriter out;
  out.WriteHeader(CheckpointKind::kAttackOutcome);
  auto write = [&](const std::vector<double>& scores,
                   const std::vector<uint8_t>& preds) {
    if (scores.size() != preds.size()) {
      throw Error(ErrorCode::kShape, "scores and decisions differ in length");
    }
    out.WriteU64(scores.size());
    out.WriteF64s(scores);
    for (uint8_t p : preds) out.WriteU8(p ? 1 : 0);
  };
  write(outcome.scores.member_scores, outcome.member_predictions);
  write(outcome.scores.nonmember_scores, outcome.nonmember_predictions);
  out.Save(path);
}

AttackOutcome LoadAttackOutcome(const fs::path& path) {
  BinaryReader in = BinaryReader::FromFile(path);
  in.ReadHeader(CheckpointKind::kAttackOutcome);
  AttackOutcome outcome;
  auto read = [&](std::vector<double>& scores, std::vector<uint8_t>& preds) {
    const uint64_t n = in.ReadU64();
    scores.resize(n);
    for (uint64_t i = 0; i < n; ++i) scores[i] = in.ReadF64();
    preds.resize(n);
    for (uint64_t i = 0; i < n; ++i) preds[i] = in.ReadU8();
  };
  read(outcome.scores.member_scores, outcome.member_predictions);
  read(outcome.scores.nonmember_scores, outcome.nonmember_predictions);
  if (!in.AtEnd()) {
    throw Error(ErrorCode::kParse,
                fmt::format("trailing bytes in '{}'", path.string()));
  }
  return outcome;
}

RunSummary RunPlan(const ExperimentPlan& plan, const RunOptions& options) {
  plan.Validate();
  if (options.out_dir.empty()) {
    throw Error(ErrorCode::kConfiguration, "no output directory given");
  }
  const int workers = options.workers > 0 ? options.workers : plan.run.workers;
  std::vector<Stage> stages;
  if (options.stage) {
    stages.push_back(*options.stage);
  } else {
    stages.assign(std::begin(kAllStages), std::end(kAllStages));
  }
  RunSummary summary;
  for (Stage stage : stages) {
    Log(options, fmt::format("stage {}", StageName(stage)));
    switch (stage) {
      case Stage::kTrain:
        TrainStage(plan, options, workers);
        break;
      case Stage::kCompress:
        CompressStage(plan, options, workers);
        break;
      case Stage::kAttack:
        summary.failures = AttackStage(plan, options, workers);
        break;
      case Stage::kEvaluate:
        summary.failures = EvaluateStage(plan, options, workers);
        break;
      case Stage::kReport: {
        summary.report = ReportStage(plan, options);
        summary.failures.clear();
        for (const AttackRow* row : summary.report->Failures()) {
          summary.failures.push_back(fmt::format("rep {} {} on {}: {}",
                                                 row->repetition, row->attack,
                                                 row->target, row->error));
        }
        break;
      }
    }
    summary.stages_run.push_back(stage);
  }
  return summary;
}

}  // namespace leakaudit
