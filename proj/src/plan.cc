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

#include "leakaudit/plan.h"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>
#include <utility>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>
#include <fmt/ranges.h>

#include "leakaudit/error.h"

namespace leakaudit {
namespace {

namespace pt = boost::property_tree;

std::string Trim(std::string_view s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string_view::npos) return {};
  const auto end = s.find_last_not_of(" \t\r");
  return std::string(s.substr(begin, end - begin + 1));
}

constexpr std::pair<char, std::string_view> kDelimiterNames[] = {
    {',', "comma"}, {';', "semicolon"}, {'\t', "tab"}, {' ', "space"},
    {'|', "pipe"}};

std::string DelimiterName(char c) {
  for (const auto& [ch, name] : kDelimiterNames) {
    if (ch == c) return std::string(name);
  }
  return std::string(1, c);
}

std::vector<std::string> SplitList(std::string_view s) {
  std::vector<std::string> out;
  size_t start = 0;
  while (start <= s.size()) {
    const size_t comma = s.find(',', start);
    const size_t end = comma == std::string_view::npos ? s.size() : comma;
    std::string item = Trim(s.substr(start, end - start));
    if (!item.empty()) out.push_back(std::move(item));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

// Reads one section and tracks which keys were consumed so leftovers can be
// reported as unknown.
class Section {
 public:
  Section(std::string name, const pt::ptree* tree)
      : name_(std::move(name)), tree_(tree) {}

  std::optional<std::string> Raw(const std::string& key) {
    if (tree_ == nullptr) return std::nullopt;
    auto it = tree_->find(key);
    if (it == tree_->not_found()) return std::nullopt;
    used_.insert(key);
    return Trim(it->second.data());
  }

  template <typename T>
  void Number(const std::string& key, T& out) {
    auto raw = Raw(key);
    if (!raw) return;
    out = ParseNumber<T>(key, *raw);
  }

  void Bool(const std::string& key, bool& out) {
    auto raw = Raw(key);
    if (!raw) return;
    out = ParseBool(key, *raw);
  }

  template <typename T>
  void NumberList(const std::string& key, std::vector<T>& out) {
    auto raw = Raw(key);
    if (!raw) return;
    out.clear();
    for (const std::string& item : SplitList(*raw)) {
      out.push_back(ParseNumber<T>(key, item));
    }
  }

  std::optional<std::vector<std::string>> List(const std::string& key) {
    auto raw = Raw(key);
    if (!raw) return std::nullopt;
    return SplitList(*raw);
  }

  void RejectUnknown() const {
    if (tree_ == nullptr) return;
    for (const auto& [key, value] : *tree_) {
      if (!used_.count(key)) {
        throw Error(ErrorCode::kParse,
                    fmt::format("unknown key '{}' in section [{}]", key,
                                name_));
      }
    }
  }

  [[noreturn]] void Fail(const std::string& key,
                         const std::string& message) const {
    throw Error(ErrorCode::kParse,
                fmt::format("[{}] {}: {}", name_, key, message));
  }

  template <typename T>
  T ParseNumber(const std::string& key, const std::string& text) const {
    T value{};
    const char* first = text.data();
    const char* last = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last) {
      Fail(key, fmt::format("'{}' is not a valid number", text));
    }
    return value;
  }

  bool ParseBool(const std::string& key, const std::string& text) const {
    if (text == "true" || text == "yes" || text == "on" || text == "1") {
      return true;
    }
    if (text == "false" || text == "no" || text == "off" || text == "0") {
      return false;
    }
    Fail(key, fmt::format("'{}' is not a boolean", text));
  }

 private:
  std::string name_;
  const pt::ptree* tree_;
  std::set<std::string> used_;
};

// Strips `#` and `;` comments, at line start or after a value.
std::string StripComments(std::string_view text) {
  std::string out;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    const auto cut = line.find_first_of("#;");
    if (cut != std::string::npos) line.erase(cut);
    out += line;
    out += '\n';
  }
  return out;
}

template <typename Enum, typename Parse>
std::vector<Enum> ParseEnumList(const std::vector<std::string>& items,
                                Parse parse) {
  std::vector<Enum> out;
  for (const std::string& item : items) out.push_back(parse(item));
  return out;
}

NrMetric ParseNrMetric(std::string_view name) {
  if (name == "loss") return NrMetric::kLoss;
  if (name == "mentr") return NrMetric::kModifiedEntropy;
  throw Error(ErrorCode::kConfiguration,
              fmt::format("unknown NR metric '{}'", name));
}

Adversary ParseAdversary(std::string_view name) {
  if (name == "adv1") return Adversary::kAdversary1;
  if (name == "adv2") return Adversary::kAdversary2;
  throw Error(ErrorCode::kConfiguration,
              fmt::format("unknown adversary '{}'", name));
}

std::string Join(const std::vector<std::string>& items) {
  return fmt::format("{}", fmt::join(items, ","));
}

template <typename T>
std::string JoinNumbers(const std::vector<T>& items) {
  return fmt::format("{}", fmt::join(items, ","));
}

}  // namespace

std::vector<std::string> CompressionSpec::LevelNames() const {
  std::vector<std::string> out;
  for (int p : prune_percent) out.push_back(fmt::format("prune{}", p));
  if (int8) out.push_back("int8");
  for (int n : cluster_counts) out.push_back(fmt::format("cluster{}", n));
  return out;
}

int LevelDegreeTag(std::string_view level) {
  auto number = [&](std::string_view prefix) {
    const std::string_view digits = level.substr(prefix.size());
    int value = 0;
    auto [ptr, ec] =
        std::from_chars(digits.data(), digits.data() + digits.size(), value);
    if (digits.empty() || ec != std::errc() ||
        ptr != digits.data() + digits.size()) {
      throw Error(ErrorCode::kConfiguration,
                  fmt::format("unknown compression level '{}'", level));
    }
    return value;
  };
  if (level == "int8") return 8;
  if (level.starts_with("prune")) return number("prune");
  if (level.starts_with("cluster")) return ClusterDegreeTag(number("cluster"));
  throw Error(ErrorCode::kConfiguration,
              fmt::format("unknown compression level '{}'", level));
}

CompressionKind LevelFamily(std::string_view level) {
  LevelDegreeTag(level);
  if (level.starts_with("prune")) return CompressionKind::kPruneMask;
  if (level.starts_with("cluster")) return CompressionKind::kClusterAssignment;
  return CompressionKind::kFakeQuant;
}

uint64_t Fnv1a64(std::string_view text) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

void ExperimentPlan::Validate() const {
  auto fail = [](const std::string& message) {
    throw Error(ErrorCode::kConfiguration, message);
  };
  if (run.repetitions < 1) fail("run.repetitions must be >= 1");
  if (run.workers < 1) fail("run.workers must be >= 1");

  if (dataset.source == DatasetSpec::Source::kSynthetic) {
    const SynthParams& s = dataset.synth;
    if (s.classes < 2) fail("dataset.classes must be >= 2");
    if (s.features < 1) fail("dataset.features must be >= 1");
    if (!(s.cluster_spread > 0.0)) fail("dataset.cluster_spread must be > 0");
    if (s.samples < split.total()) {
      fail(fmt::format("dataset has {} samples but the split needs {}",
                       s.samples, split.total()));
    }
  } else if (dataset.csv_path.empty()) {
    fail("dataset.path is required for csv data");
  }

  if (split.victim_train == 0 || split.shadow_train == 0) {
    fail("split sizes must be positive");
  }
  if (split.victim_train != split.victim_test ||
      split.shadow_train != split.shadow_test) {
    fail("member and non-member sets must have equal sizes");
  }

  if (model.hidden.empty()) fail("model.hidden must list at least one layer");
  for (int h : model.hidden) {
    if (h < 1) fail("model.hidden sizes must be positive");
  }
  if (!(model.dropout >= 0.0 && model.dropout < 1.0)) {
    fail("model.dropout must be in [0, 1)");
  }
  train.Validate();
  if (dp) dp->Validate();

  std::set<int> seen;
  for (int p : compression.prune_percent) {
    if (p < 1 || p > 99) fail(fmt::format("prune level {} not in [1, 99]", p));
    if (!seen.insert(p).second) fail(fmt::format("duplicate prune level {}", p));
  }
  seen.clear();
  for (int n : compression.cluster_counts) {
    if (n < 2 || n > 255) {
      fail(fmt::format("cluster count {} not in [2, 255]", n));
    }
    if (!seen.insert(n).second) {
      fail(fmt::format("duplicate cluster count {}", n));
    }
  }
  if (compression.finetune_epochs < 0) fail("finetune_epochs must be >= 0");
  if (!(compression.finetune_fraction > 0.0 &&
        compression.finetune_fraction <= 1.0)) {
    fail("finetune_fraction must be in (0, 1]");
  }
  if (compression.finetune_learning_rate &&
      !(*compression.finetune_learning_rate > 0.0)) {
    fail("finetune_learning_rate must be > 0");
  }

  const std::vector<std::string> levels = compression.LevelNames();
  auto declared = [&](const std::string& name) {
    return std::find(levels.begin(), levels.end(), name) != levels.end();
  };
  for (const std::string& t : attacks.targets) {
    if (!declared(t)) {
      fail(fmt::format("attack target '{}' is not a declared compression "
                       "level",
                       t));
    }
  }
  if (!attacks.nr_classifiers.empty() && attacks.nr_with_label.empty()) {
    fail("nr_label selects no variant");
  }
  const bool has_nr =
      !attacks.nr_metrics.empty() || !attacks.nr_classifiers.empty();
  const bool has_sr =
      !attacks.sr_constructions.empty() && !attacks.sr_classifiers.empty();
  if (attacks.sr_constructions.empty() != attacks.sr_classifiers.empty()) {
    fail("sr_constructions and sr_classifiers must be given together");
  }
  if ((has_sr || (has_nr && !attacks.nr_on_original)) && levels.empty()) {
    fail("attacks need at least one compression level");
  }
  if (!attacks.mr_adversaries.empty()) {
    if (attacks.mr_models.size() < 2) {
      fail("multi-reference attacks need at least two mr_models");
    }
    for (const std::string& m : attacks.mr_models) {
      if (!declared(m)) {
        fail(fmt::format("mr_models references undeclared compression level "
                         "'{}'",
                         m));
      }
    }
    for (size_t i = 1; i < attacks.mr_models.size(); ++i) {
      const std::string& prev = attacks.mr_models[i - 1];
      const std::string& cur = attacks.mr_models[i];
      if (LevelFamily(prev) != LevelFamily(cur)) {
        throw Error(ErrorCode::kOrdering,
                    fmt::format("mr_models mixes families ({} and {})", prev,
                                cur));
      }
      if (LevelDegreeTag(cur) < LevelDegreeTag(prev)) {
        throw Error(ErrorCode::kOrdering,
                    fmt::format("mr_models must ascend in compression degree "
                                "({} before {})",
                                prev, cur));
      }
    }
    if (attacks.mr_cross_fit_folds == 1 || attacks.mr_cross_fit_folds < 0) {
      fail("mr_cross_fit_folds must be 0 or >= 2");
    }
  }
  for (double cap : metrics.fpr_caps) {
    if (!(cap > 0.0 && cap <= 1.0)) {
      fail(fmt::format("fpr cap {} not in (0, 1]", cap));
    }
  }
}

std::vector<std::string> ExperimentPlan::TargetLevels() const {
  return attacks.targets.empty() ? compression.LevelNames() : attacks.targets;
}

uint64_t ExperimentPlan::RepetitionSeed(int repetition) const {
  return DeriveSeed(run.seed_base, static_cast<uint64_t>(repetition));
}

std::string ExperimentPlan::CanonicalText() const {
  std::string out;
  auto line = [&](std::string_view key, const auto& value) {
    out += fmt::format("{} = {}\n", key, value);
  };
  auto names = [](const auto& items, auto name_of) {
    std::vector<std::string> out;
    for (const auto& item : items) out.emplace_back(name_of(item));
    return Join(out);
  };
  auto bool_text = [](bool b) { return b ? "true" : "false"; };

  out += "[dataset]\n";
  if (dataset.source == DatasetSpec::Source::kSynthetic) {
    line("source", "synth");
    line("samples", dataset.synth.samples);
    line("features", dataset.synth.features);
    line("classes", dataset.synth.classes);
    line("cluster_spread", dataset.synth.cluster_spread);
    line("seed", dataset.synth.seed);
  } else {
    line("source", "csv");
    line("path", dataset.csv_path.lexically_normal().generic_string());
    line("has_header", bool_text(dataset.csv.has_header));
    line("label_column", dataset.csv.label_column);
    line("classes", dataset.csv.class_count);
    line("delimiter", DelimiterName(dataset.csv.delimiter));
  }
  out += "[split]\n";
  line("victim_train", split.victim_train);
  line("victim_test", split.victim_test);
  line("shadow_train", split.shadow_train);
  line("shadow_test", split.shadow_test);
  line("victim_valid", split.victim_valid);
  line("shadow_valid", split.shadow_valid);
  out += "[model]\n";
  line("hidden", JoinNumbers(model.hidden));
  line("dropout", model.dropout);
  out += "[train]\n";
  line("learning_rate", train.learning_rate);
  line("batch_size", train.batch_size);
  line("max_epochs", train.max_epochs);
  line("l2", train.l2_lambda);
  line("patience", train.early_stop_patience);
  line("momentum", train.momentum);
  out += "[dp]\n";
  line("enabled", bool_text(dp.has_value()));
  if (dp) {
    line("noise_multiplier", dp->noise_multiplier);
    line("clip_norm", dp->clip_norm);
    line("delta", dp->delta);
  }
  out += "[compression]\n";
  line("prune", JoinNumbers(compression.prune_percent));
  line("prune_scope", compression.prune_scope == PruneScope::kGlobal
                          ? "global"
                          : "per_layer");
  line("cluster", JoinNumbers(compression.cluster_counts));
  line("int8", bool_text(compression.int8));
  line("int8_mode", compression.int8_mode == QuantMode::kPostTraining
                        ? "ptq"
                        : "qat");
  line("finetune_epochs", compression.finetune_epochs);
  line("finetune_learning_rate",
       compression.finetune_learning_rate.value_or(train.learning_rate));
  line("finetune_fraction", compression.finetune_fraction);
  out += "[attacks]\n";
  line("nr_metric", names(attacks.nr_metrics, NrMetricName));
  line("nr_trained", names(attacks.nr_classifiers, MetaClassifierKindName));
  const bool without_label =
      std::find(attacks.nr_with_label.begin(), attacks.nr_with_label.end(),
                false) != attacks.nr_with_label.end();
  const bool with_label =
      std::find(attacks.nr_with_label.begin(), attacks.nr_with_label.end(),
                true) != attacks.nr_with_label.end();
  line("nr_label", with_label && without_label ? "both"
                   : with_label               ? "with"
                                              : "none");
  line("sr_constructions",
       names(attacks.sr_constructions, SrConstructionName));
  line("sr_classifiers", names(attacks.sr_classifiers, MetaClassifierKindName));
  line("mr_adversaries", names(attacks.mr_adversaries, AdversaryName));
  line("mr_models", Join(attacks.mr_models));
  line("mr_sr_construction", SrConstructionName(attacks.mr_sr_construction));
  line("mr_sr_classifier", MetaClassifierKindName(attacks.mr_sr_classifier));
  line("mr_cross_fit_folds", attacks.mr_cross_fit_folds);
  line("targets", Join(attacks.targets));
  line("nr_on_original", bool_text(attacks.nr_on_original));
  line("export_features", bool_text(attacks.export_features));
  out += "[meta]\n";
  line("lr_iterations", meta.lr.iterations);
  line("lr_l2", meta.lr.l2_lambda);
  line("rf_trees", meta.rf.num_trees);
  line("rf_max_depth", meta.rf.max_depth);
  line("rf_min_samples_split", meta.rf.min_samples_split);
  line("rf_bootstrap", bool_text(meta.rf.bootstrap));
  line("rf_max_features", meta.rf.max_features);
  line("mlp_hidden", meta.mlp.hidden);
  line("mlp_epochs", meta.mlp.epochs);
  line("mlp_batch_size", meta.mlp.batch_size);
  line("mlp_learning_rate", meta.mlp.learning_rate);
  line("mlp_l2", meta.mlp.l2_lambda);
  line("mlp_validation_fraction", meta.mlp.validation_fraction);
  line("mlp_patience", meta.mlp.patience);
  line("mlp_standardize", bool_text(meta.mlp.standardize));
  out += "[metrics]\n";
  line("fpr_caps", JoinNumbers(metrics.fpr_caps));
  line("kl_diagnostics", bool_text(metrics.kl_diagnostics));
  line("null_check", bool_text(metrics.null_check));
  out += "[run]\n";
  line("repetitions", run.repetitions);
  return out;
}

std::string ExperimentPlan::Hash() const {
  return fmt::format("{:016x}", Fnv1a64(CanonicalText()));
}

ExperimentPlan ParsePlan(std::string_view text,
                         const std::filesystem::path& base_dir) {
  pt::ptree root;
  try {
    std::istringstream in(StripComments(text));
    pt::read_ini(in, root);
  } catch (const pt::ini_parser_error& e) {
    throw Error(ErrorCode::kParse,
                fmt::format("plan line {}: {}", e.line(), e.message()));
  }
  static const std::set<std::string> kSections = {
      "dataset", "split",   "model", "train",   "dp",
      "compression", "attacks", "meta", "metrics", "run"};
  for (const auto& [name, tree] : root) {
    if (!kSections.count(name)) {
      throw Error(ErrorCode::kParse,
                  fmt::format("unknown plan section [{}]", name));
    }
    if (tree.empty() && !tree.data().empty()) {
      throw Error(ErrorCode::kParse,
                  fmt::format("key '{}' outside any section", name));
    }
  }
  auto section = [&](const std::string& name) {
    auto it = root.find(name);
    return Section(name, it == root.not_found() ? nullptr : &it->second);
  };

  ExperimentPlan plan;
  {
    Section s = section("dataset");
    const std::string source = s.Raw("source").value_or("synth");
    if (source == "synth") {
      plan.dataset.source = DatasetSpec::Source::kSynthetic;
    } else if (source == "csv") {
      plan.dataset.source = DatasetSpec::Source::kCsv;
    } else {
      s.Fail("source", fmt::format("'{}' is not synth or csv", source));
    }
    if (auto path = s.Raw("path")) {
      std::filesystem::path p(*path);
      plan.dataset.csv_path = p.is_relative() ? base_dir / p : p;
    }
    s.Bool("has_header", plan.dataset.csv.has_header);
    s.Number("label_column", plan.dataset.csv.label_column);
    if (auto d = s.Raw("delimiter")) {
      const auto named = std::find_if(
          std::begin(kDelimiterNames), std::end(kDelimiterNames),
          [&](const auto& entry) { return entry.second == *d; });
      if (named != std::end(kDelimiterNames)) {
        plan.dataset.csv.delimiter = named->first;
      } else if (d->size() == 1) {
        plan.dataset.csv.delimiter = (*d)[0];
      } else {
        s.Fail("delimiter", "must be one character or comma, semicolon, "
                            "tab, space or pipe");
      }
    }
    s.Number("samples", plan.dataset.synth.samples);
    s.Number("features", plan.dataset.synth.features);
    int classes = 0;
    s.Number("classes", classes);
    plan.dataset.synth.classes = classes > 0 ? classes : 10;
    plan.dataset.csv.class_count = classes;
    s.Number("cluster_spread", plan.dataset.synth.cluster_spread);
    s.Number("seed", plan.dataset.synth.seed);
    s.RejectUnknown();
  }
  {
    Section s = section("split");
    s.Number("victim_train", plan.split.victim_train);
    s.Number("victim_test", plan.split.victim_test);
    s.Number("shadow_train", plan.split.shadow_train);
    s.Number("shadow_test", plan.split.shadow_test);
    s.Number("victim_valid", plan.split.victim_valid);
    s.Number("shadow_valid", plan.split.shadow_valid);
    s.RejectUnknown();
  }
  {
    Section s = section("model");
    s.NumberList("hidden", plan.model.hidden);
    s.Number("dropout", plan.model.dropout);
    s.RejectUnknown();
  }
  {
    Section s = section("train");
    s.Number("learning_rate", plan.train.learning_rate);
    s.Number("batch_size", plan.train.batch_size);
    s.Number("max_epochs", plan.train.max_epochs);
    s.Number("l2", plan.train.l2_lambda);
    s.Number("patience", plan.train.early_stop_patience);
    s.Number("momentum", plan.train.momentum);
    s.RejectUnknown();
  }
  {
    Section s = section("dp");
    bool enabled = false;
    s.Bool("enabled", enabled);
    DpConfig dp;
    s.Number("noise_multiplier", dp.noise_multiplier);
    s.Number("clip_norm", dp.clip_norm);
    s.Number("delta", dp.delta);
    if (enabled) plan.dp = dp;
    s.RejectUnknown();
  }
  {
    Section s = section("compression");
    s.NumberList("prune", plan.compression.prune_percent);
    if (auto scope = s.Raw("prune_scope")) {
      if (*scope == "global") {
        plan.compression.prune_scope = PruneScope::kGlobal;
      } else if (*scope == "per_layer") {
        plan.compression.prune_scope = PruneScope::kPerLayer;
      } else {
        s.Fail("prune_scope", "expected global or per_layer");
      }
    }
    s.NumberList("cluster", plan.compression.cluster_counts);
    s.Bool("int8", plan.compression.int8);
    if (auto mode = s.Raw("int8_mode")) {
      if (*mode == "ptq") {
        plan.compression.int8_mode = QuantMode::kPostTraining;
      } else if (*mode == "qat") {
        plan.compression.int8_mode = QuantMode::kQuantAwareTraining;
      } else {
        s.Fail("int8_mode", "expected ptq or qat");
      }
    }
    s.Number("finetune_epochs", plan.compression.finetune_epochs);
    if (auto lr = s.Raw("finetune_learning_rate")) {
      plan.compression.finetune_learning_rate =
          s.ParseNumber<double>("finetune_learning_rate", *lr);
    }
    s.Number("finetune_fraction", plan.compression.finetune_fraction);
    s.RejectUnknown();
  }
  {
    Section s = section("attacks");
    AttackSpec& a = plan.attacks;
    if (auto v = s.List("nr_metric")) {
      a.nr_metrics = ParseEnumList<NrMetric>(*v, ParseNrMetric);
    }
    if (auto v = s.List("nr_trained")) {
      a.nr_classifiers =
          ParseEnumList<MetaClassifierKind>(*v, ParseMetaClassifierKind);
    }
    if (auto v = s.Raw("nr_label")) {
      if (*v == "none") {
        a.nr_with_label = {false};
      } else if (*v == "with") {
        a.nr_with_label = {true};
      } else if (*v == "both") {
        a.nr_with_label = {false, true};
      } else {
        s.Fail("nr_label", "expected none, with or both");
      }
    }
    if (auto v = s.List("sr_constructions")) {
      a.sr_constructions =
          ParseEnumList<SrConstruction>(*v, ParseSrConstruction);
    }
    if (auto v = s.List("sr_classifiers")) {
      a.sr_classifiers =
          ParseEnumList<MetaClassifierKind>(*v, ParseMetaClassifierKind);
    }
    if (auto v = s.List("mr_adversaries")) {
      a.mr_adversaries = ParseEnumList<Adversary>(*v, ParseAdversary);
    }
    if (auto v = s.List("mr_models")) a.mr_models = *v;
    if (auto v = s.Raw("mr_sr_construction")) {
      a.mr_sr_construction = ParseSrConstruction(*v);
    }
    if (auto v = s.Raw("mr_sr_classifier")) {
      a.mr_sr_classifier = ParseMetaClassifierKind(*v);
    }
    s.Number("mr_cross_fit_folds", a.mr_cross_fit_folds);
    if (auto v = s.List("targets")) a.targets = *v;
    s.Bool("nr_on_original", a.nr_on_original);
    s.Bool("export_features", a.export_features);
    s.RejectUnknown();
  }
  {
    Section s = section("meta");
    MetaHyperparameters& m = plan.meta;
    s.Number("lr_iterations", m.lr.iterations);
    s.Number("lr_l2", m.lr.l2_lambda);
    s.Number("rf_trees", m.rf.num_trees);
    s.Number("rf_max_depth", m.rf.max_depth);
    s.Number("rf_min_samples_split", m.rf.min_samples_split);
    s.Bool("rf_bootstrap", m.rf.bootstrap);
    s.Number("rf_max_features", m.rf.max_features);
    s.Number("mlp_hidden", m.mlp.hidden);
    s.Number("mlp_epochs", m.mlp.epochs);
    s.Number("mlp_batch_size", m.mlp.batch_size);
    s.Number("mlp_learning_rate", m.mlp.learning_rate);
    s.Number("mlp_l2", m.mlp.l2_lambda);
    s.Number("mlp_validation_fraction", m.mlp.validation_fraction);
    s.Number("mlp_patience", m.mlp.patience);
    s.Bool("mlp_standardize", m.mlp.standardize);
    s.RejectUnknown();
  }
  {
    Section s = section("metrics");
    s.NumberList("fpr_caps", plan.metrics.fpr_caps);
    s.Bool("kl_diagnostics", plan.metrics.kl_diagnostics);
    s.Bool("null_check", plan.metrics.null_check);
    s.RejectUnknown();
  }
  {
    Section s = section("run");
    s.Number("repetitions", plan.run.repetitions);
    s.Number("seed_base", plan.run.seed_base);
    s.Number("workers", plan.run.workers);
    s.RejectUnknown();
  }
  plan.Validate();
  return plan;
}

ExperimentPlan LoadPlan(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::kIo,
                fmt::format("cannot read plan '{}'", path.string()));
  }
  std::stringstream buffer;
  buffer << in.rdbuf();
  return ParsePlan(buffer.str(), path.parent_path());
}

}  // namespace leakaudit
