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

#include "leakaudit/data.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <string_view>
#include <unordered_set>

#include <fmt/format.h>

#include "leakaudit/error.h"

namespace leakaudit {
namespace {

std::vector<std::string_view> SplitLine(std::string_view line, char delim) {
  std::vector<std::string_view> fields;
  size_t start = 0;
  while (true) {
    const size_t pos = line.find(delim, start);
    if (pos == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return fields;
}

std::string_view Trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) {
    s.remove_prefix(1);
  }
  while (!s.empty() &&
         (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

bool ParseDouble(std::string_view s, double& out) {
  s = Trim(s);
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

bool ParseInt(std::string_view s, long long& out) {
  s = Trim(s);
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  if (ec == std::errc() && ptr == s.data() + s.size()) return true;
  // Accept integral values written as floats ("3.0").
  double d;
  if (ParseDouble(s, d) && std::isfinite(d) && d == std::floor(d)) {
    out = static_cast<long long>(d);
    return true;
  }
  return false;
}

std::vector<size_t> ShuffledIndices(size_t n, uint64_t seed) {
  std::vector<size_t> idx(n);
  std::iota(idx.begin(), idx.end(), size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(idx.begin(), idx.end(), rng);
  return idx;
}

}  // namespace

void TabularDataset::Validate() const {
  if (static_cast<size_t>(features.rows()) != labels.size()) {
    throw Error(ErrorCode::kShape,
                fmt::format("{} feature rows but {} labels", features.rows(),
                            labels.size()));
  }
  if (class_count <= 0) {
    throw Error(ErrorCode::kSchema, "class count must be positive");
  }
  for (size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= class_count) {
      throw Error(ErrorCode::kSchema,
                  fmt::format("label {} at row {} outside [0, {})", labels[i],
                              i, class_count));
    }
  }
  if (!features.allFinite()) {
    throw Error(ErrorCode::kInput, "non-finite feature value");
  }
}

TabularDataset TabularDataset::Subset(std::span<const size_t> indices) const {
  TabularDataset out;
  out.features.resize(static_cast<Eigen::Index>(indices.size()),
                      features.cols());
  out.labels.reserve(indices.size());
  for (size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] >= size()) {
      throw Error(ErrorCode::kSize,
                  fmt::format("index {} outside dataset of {} rows",
                              indices[i], size()));
    }
    out.features.row(static_cast<Eigen::Index>(i)) =
        features.row(static_cast<Eigen::Index>(indices[i]));
    out.labels.push_back(labels[indices[i]]);
  }
  out.class_count = class_count;
  out.provenance = provenance;
  return out;
}

TabularDataset LoadCsv(const std::filesystem::path& path,
                       const CsvSchema& schema) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());

  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  std::string line;
  size_t line_no = 0;
  size_t width = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 && schema.has_header) continue;
    if (Trim(line).empty()) continue;
    const auto fields = SplitLine(line, schema.delimiter);
    if (width == 0) {
      width = fields.size();
      if (width < 2) {
        throw Error(ErrorCode::kParse,
                    fmt::format("line {}: need at least one feature and a "
                                "label column",
                                line_no));
      }
    } else if (fields.size() != width) {
      throw Error(ErrorCode::kParse,
                  fmt::format("line {}: expected {} columns, found {}",
                              line_no, width, fields.size()));
    }
    const long long label_col =
        schema.label_column < 0
            ? static_cast<long long>(width) + schema.label_column
            : schema.label_column;
    if (label_col < 0 || label_col >= static_cast<long long>(width)) {
      throw Error(ErrorCode::kSchema,
                  fmt::format("label column {} outside {} columns",
                              schema.label_column, width));
    }
    std::vector<double> row;
    row.reserve(width - 1);
    long long label = 0;
    for (size_t c = 0; c < width; ++c) {
      if (static_cast<long long>(c) == label_col) {
        if (!ParseInt(fields[c], label)) {
          throw Error(ErrorCode::kParse,
                      fmt::format("line {}: label '{}' is not an integer",
                                  line_no, fields[c]));
        }
        continue;
      }
      double v;
      if (!ParseDouble(fields[c], v) || !std::isfinite(v)) {
        throw Error(ErrorCode::kParse,
                    fmt::format("line {}, column {}: '{}' is not a finite "
                                "number",
                                line_no, c + 1, Trim(fields[c])));
      }
      row.push_back(v);
    }
    if (label < 0 || (schema.class_count > 0 && label >= schema.class_count)) {
      throw Error(ErrorCode::kSchema,
                  fmt::format("line {}: label {} out of range", line_no,
                              label));
    }
    rows.push_back(std::move(row));
    labels.push_back(static_cast<int>(label));
  }
  if (rows.empty()) {
    throw Error(ErrorCode::kParse, path.string() + " holds no data rows");
  }

  TabularDataset ds;
  ds.features.resize(static_cast<Eigen::Index>(rows.size()),
                     static_cast<Eigen::Index>(width - 1));
  for (size_t r = 0; r < rows.size(); ++r) {
    for (size_t c = 0; c + 1 < width; ++c) {
      ds.features(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          rows[r][c];
    }
  }
  ds.labels = std::move(labels);
  ds.class_count =
      schema.class_count > 0
          ? schema.class_count
          : *std::max_element(ds.labels.begin(), ds.labels.end()) + 1;
  ds.provenance = "csv:" + path.filename().string();
  ds.Validate();
  return ds;
}

void WriteCsv(const std::filesystem::path& path, const TabularDataset& data) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  for (size_t r = 0; r < data.size(); ++r) {
    for (Eigen::Index c = 0; c < data.features.cols(); ++c) {
      out << fmt::format("{}", data.features(static_cast<Eigen::Index>(r), c))
          << ',';
    }
    out << data.labels[r] << '\n';
  }
}

TabularDataset SynthGenerate(const SynthParams& params) {
  if (params.classes < 1 || params.features < 1) {
    throw Error(ErrorCode::kConfiguration,
                "synthetic data needs at least one class and one feature");
  }
  if (params.samples < static_cast<size_t>(params.classes)) {
    throw Error(ErrorCode::kSize,
                fmt::format("{} samples cannot cover {} classes",
                            params.samples, params.classes));
  }
  if (!(params.cluster_spread >= 0.0) ||
      !std::isfinite(params.cluster_spread)) {
    throw Error(ErrorCode::kConfiguration,
                "cluster spread must be finite and non-negative");
  }
  std::mt19937_64 rng(params.seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  Matrix centres(params.classes, params.features);
  for (Eigen::Index i = 0; i < centres.size(); ++i) {
    centres.data()[i] = normal(rng);
  }

  const size_t n = params.samples;
  std::vector<int> cycle(n);
  for (size_t i = 0; i < n; ++i) cycle[i] = static_cast<int>(i % params.classes);
  std::shuffle(cycle.begin(), cycle.end(), rng);

  TabularDataset ds;
  ds.features.resize(static_cast<Eigen::Index>(n), params.features);
  ds.labels = std::move(cycle);
  for (size_t i = 0; i < n; ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    for (int c = 0; c < params.features; ++c) {
      ds.features(r, c) =
          centres(ds.labels[i], c) + params.cluster_spread * normal(rng);
    }
  }
  ds.class_count = params.classes;
  ds.provenance = fmt::format("synth:n={},d={},c={},spread={},seed={}",
                              params.samples, params.features, params.classes,
                              params.cluster_spread, params.seed);
  return ds;
}

void SplitPlan::Validate(size_t dataset_size) const {
  std::unordered_set<size_t> seen;
  const std::vector<size_t>* parts[] = {&victim_train, &victim_test,
                                        &shadow_train, &shadow_test,
                                        &victim_valid, &shadow_valid};
  for (const auto* part : parts) {
    for (size_t idx : *part) {
      if (idx >= dataset_size) {
        throw Error(ErrorCode::kSize,
                    fmt::format("split index {} outside dataset of {} rows",
                                idx, dataset_size));
      }
      if (!seen.insert(idx).second) {
        throw Error(ErrorCode::kValidation,
                    fmt::format("split index {} appears twice", idx));
      }
    }
  }
}

SplitPlan MakeSplit(const TabularDataset& dataset, const SplitSizes& sizes,
                    uint64_t seed) {
  if (sizes.total() > dataset.size()) {
    throw Error(ErrorCode::kSize,
                fmt::format("split needs {} samples, dataset has {}",
                            sizes.total(), dataset.size()));
  }
  if (sizes.victim_train != sizes.victim_test ||
      sizes.shadow_train != sizes.shadow_test) {
    throw Error(ErrorCode::kSize,
                "member and non-member sets must be equally sized");
  }
  const auto order = ShuffledIndices(dataset.size(), seed);
  SplitPlan plan;
  plan.seed = seed;
  size_t cursor = 0;
  auto take = [&](size_t count, std::vector<size_t>& into) {
    into.assign(order.begin() + static_cast<std::ptrdiff_t>(cursor),
                order.begin() + static_cast<std::ptrdiff_t>(cursor + count));
    cursor += count;
  };
  take(sizes.victim_train, plan.victim_train);
  take(sizes.victim_test, plan.victim_test);
  take(sizes.shadow_train, plan.shadow_train);
  take(sizes.shadow_test, plan.shadow_test);
  take(sizes.victim_valid, plan.victim_valid);
  take(sizes.shadow_valid, plan.shadow_valid);
  plan.Validate(dataset.size());
  return plan;
}

FinetunePlan MakeFinetunePlan(std::span<const size_t> victim_train,
                              double fraction, uint64_t seed) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw Error(ErrorCode::kConfiguration,
                fmt::format("fine-tune fraction {} outside (0, 1]", fraction));
  }
  if (victim_train.empty()) {
    throw Error(ErrorCode::kSize, "empty victim training set");
  }
  const auto order = ShuffledIndices(victim_train.size(), seed);
  const size_t n = victim_train.size();
  const size_t keep = std::clamp<size_t>(
      static_cast<size_t>(std::llround(fraction * static_cast<double>(n))), 1,
      n);
  FinetunePlan plan;
  plan.fraction = fraction;
  plan.seed = seed;
  for (size_t i = 0; i < n; ++i) {
    (i < keep ? plan.finetune : plan.held_out)
        .push_back(victim_train[order[i]]);
  }
  return plan;
}

}  // namespace leakaudit
