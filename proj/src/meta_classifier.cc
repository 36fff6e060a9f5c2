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

#include "leakaudit/meta_classifier.h"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "leakaudit/error.h"

namespace leakaudit {

std::string_view MetaClassifierKindName(MetaClassifierKind kind) {
  switch (kind) {
    case MetaClassifierKind::kLogisticRegression:
      return "lr";
    case MetaClassifierKind::kRandomForest:
      return "rf";
    case MetaClassifierKind::kMlp:
      return "mlp";
  }
  return "unknown";
}

MetaClassifierKind ParseMetaClassifierKind(std::string_view name) {
  if (name == "lr") return MetaClassifierKind::kLogisticRegression;
  if (name == "rf") return MetaClassifierKind::kRandomForest;
  if (name == "mlp") return MetaClassifierKind::kMlp;
  throw Error(ErrorCode::kConfiguration,
              fmt::format("unknown meta-classifier '{}'", name));
}

MetaDataset MetaDataset::FromRecords(std::span<const MetaRecord> records) {
  MetaDataset data;
  if (records.empty()) return data;
  const size_t width = records.front().features.size();
  data.features.resize(static_cast<Eigen::Index>(records.size()),
                       static_cast<Eigen::Index>(width));
  data.membership.reserve(records.size());
  for (size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    if (r.features.size() != width) {
      throw Error(ErrorCode::kShape,
                  fmt::format("record {} has {} features, expected {}", i,
                              r.features.size(), width));
    }
    for (size_t c = 0; c < width; ++c) {
      data.features(static_cast<Eigen::Index>(i),
                    static_cast<Eigen::Index>(c)) = r.features[c];
    }
    data.membership.push_back(r.membership);
  }
  return data;
}

MetaClassifier MetaClassifier::Fit(MetaClassifierKind kind,
                                   std::span<const MetaRecord> records,
                                   const MetaHyperparameters& hyper,
                                   uint64_t seed) {
  return Fit(kind, MetaDataset::FromRecords(records), hyper, seed);
}

MetaClassifier MetaClassifier::Fit(MetaClassifierKind kind,
                                   const MetaDataset& data,
                                   const MetaHyperparameters& hyper,
                                   uint64_t seed) {
  if (static_cast<size_t>(data.features.rows()) != data.membership.size()) {
    throw Error(ErrorCode::kShape, "one membership label per row required");
  }
  if (!data.features.allFinite()) {
    throw Error(ErrorCode::kInput, "non-finite meta feature");
  }
  size_t members = 0;
  for (int m : data.membership) {
    if (m != 0 && m != 1) {
      throw Error(ErrorCode::kInput, "membership labels must be 0 or 1");
    }
    members += static_cast<size_t>(m);
  }
  if (members == 0 || members == data.membership.size()) {
    throw Error(ErrorCode::kDegenerateData,
                "meta-classifier training needs both members and "
                "non-members");
  }
  const auto& x = data.features;
  const auto& y = data.membership;
  MetaClassifier clf = [&] {
    switch (kind) {
      case MetaClassifierKind::kLogisticRegression:
        return MetaClassifier(LogisticRegression::Fit(x, y, hyper.lr));
      case MetaClassifierKind::kRandomForest:
        return MetaClassifier(RandomForest::Fit(x, y, hyper.rf, seed));
      case MetaClassifierKind::kMlp:
        return MetaClassifier(MlpClassifier::Fit(x, y, hyper.mlp, seed));
    }
    throw Error(ErrorCode::kConfiguration, "unknown meta-classifier kind");
  }();
  clf.seed_ = seed;
  return clf;
}

MetaClassifierKind MetaClassifier::kind() const {
  switch (impl_.index()) {
    case 0:
      return MetaClassifierKind::kLogisticRegression;
    case 1:
      return MetaClassifierKind::kRandomForest;
    default:
      return MetaClassifierKind::kMlp;
  }
}

int MetaClassifier::feature_dim() const {
  return std::visit([](const auto& m) { return m.feature_dim(); }, impl_);
}

double MetaClassifier::ScoreProba(std::span<const double> features) const {
  const double p =
      std::visit([&](const auto& m) { return m.ScoreProba(features); }, impl_);
  return std::clamp(p, 0.0, 1.0);
}

Vector MetaClassifier::ScoreBatch(const Matrix& features) const {
  Vector p =
      std::visit([&](const auto& m) { return m.ScoreBatch(features); }, impl_);
  return p.cwiseMax(0.0).cwiseMin(1.0);
}

void MetaClassifier::Write(BinaryWriter& out) const {
  out.WriteU32(static_cast<uint32_t>(kind()));
  out.WriteU64(seed_);
  std::visit([&](const auto& m) { m.Write(out); }, impl_);
}

MetaClassifier MetaClassifier::Read(BinaryReader& in) {
  const uint32_t kind = in.ReadU32();
  const uint64_t seed = in.ReadU64();
  MetaClassifier clf = [&] {
    switch (static_cast<MetaClassifierKind>(kind)) {
      case MetaClassifierKind::kLogisticRegression:
        return MetaClassifier(LogisticRegression::Read(in));
      case MetaClassifierKind::kRandomForest:
        return MetaClassifier(RandomForest::Read(in));
      case MetaClassifierKind::kMlp:
        return MetaClassifier(MlpClassifier::Read(in));
    }
    throw Error(ErrorCode::kParse,
                fmt::format("unknown meta-classifier kind {}", kind));
  }();
  clf.seed_ = seed;
  return clf;
}

void MetaClassifier::Save(const std::filesystem::path& path) const {
  BinaryWriter out;
  out.WriteHeader(CheckpointKind::kMetaClassifier);
  Write(out);
  out.Save(path);
}

MetaClassifier MetaClassifier::Load(const std::filesystem::path& path) {
  BinaryReader in = BinaryReader::FromFile(path);
  in.ReadHeader(CheckpointKind::kMetaClassifier);
  MetaClassifier clf = Read(in);
  if (!in.AtEnd()) throw Error(ErrorCode::kParse, "trailing checkpoint bytes");
  return clf;
}

}  // namespace leakaudit
