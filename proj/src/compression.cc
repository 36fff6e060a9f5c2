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

#include "leakaudit/compression.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <set>

#include <fmt/format.h>

#include "leakaudit/error.h"

namespace leakaudit {
namespace {

std::span<double> Flat(Matrix& m) {
  return {m.data(), static_cast<size_t>(m.size())};
}

void CheckLayerCount(size_t expected, const FcnModel& model) {
  if (expected != model.num_layers()) {
    throw Error(ErrorCode::kShape,
                fmt::format("constraint covers {} layers, model has {}",
                            expected, model.num_layers()));
  }
}

// floor(fraction * total) robust to representation error such as 0.7 * 100.
size_t CountForFraction(double fraction, size_t total) {
  const double raw = fraction * static_cast<double>(total);
  return std::min(total, static_cast<size_t>(std::floor(raw + 1e-9)));
}

// Mean taken relative to the first value so a cluster of identical values
// reproduces that value exactly.
double StableMean(std::span<const double> values,
                  std::span<const uint32_t> members) {
  const double origin = values[members.front()];
  double acc = 0.0;
  for (uint32_t i : members) acc += values[i] - origin;
  return origin + acc / static_cast<double>(members.size());
}

void QuantizeInPlace(std::span<double> w, double range) {
  for (double& v : w) v = DequantizeValue(QuantizeValue(v, range), range);
}

}  // namespace

std::string_view CompressionKindName(CompressionKind kind) {
  switch (kind) {
    case CompressionKind::kPruneMask:
      return "prune";
    case CompressionKind::kClusterAssignment:
      return "cluster";
    case CompressionKind::kFakeQuant:
      return "int8";
  }
  return "unknown";
}

double QuantRange(std::span<const double> weights) {
  double max_abs = 0.0;
  for (double w : weights) max_abs = std::max(max_abs, std::abs(w));
  return max_abs > 0.0 ? max_abs : static_cast<double>(kInt8Max);
}

int QuantizeValue(double w, double range) {
  const double q = std::round(w * kInt8Max / range);
  return static_cast<int>(std::clamp(q, -double{kInt8Max}, double{kInt8Max}));
}

double DequantizeValue(int q, double range) {
  return static_cast<double>(q) * range / kInt8Max;
}

CompressionConstraint CompressionConstraint::PruneMask(
    std::vector<std::vector<uint8_t>> masks) {
  CompressionConstraint c;
  c.kind_ = CompressionKind::kPruneMask;
  c.masks_ = std::move(masks);
  return c;
}

CompressionConstraint CompressionConstraint::Clusters(
    std::vector<LayerClusters> layers) {
  for (const auto& layer : layers) {
    for (uint32_t a : layer.assignment) {
      if (a >= layer.centroids.size()) {
        throw Error(ErrorCode::kValidation,
                    "cluster assignment exceeds centroid count");
      }
    }
  }
  CompressionConstraint c;
  c.kind_ = CompressionKind::kClusterAssignment;
  c.clusters_ = std::move(layers);
  return c;
}

CompressionConstraint CompressionConstraint::FakeQuant(
    std::vector<double> ranges) {
  for (double r : ranges) {
    if (!(r > 0.0) || !std::isfinite(r)) {
      throw Error(ErrorCode::kValidation, "quantization scale must be > 0");
    }
  }
  CompressionConstraint c;
  c.kind_ = CompressionKind::kFakeQuant;
  c.ranges_ = std::move(ranges);
  return c;
}

double CompressionConstraint::Sparsity() const {
  if (kind_ != CompressionKind::kPruneMask) return 0.0;
  size_t total = 0;
  size_t pruned = 0;
  for (const auto& m : masks_) {
    total += m.size();
    pruned += static_cast<size_t>(std::count(m.begin(), m.end(), 0));
  }
  return total == 0 ? 0.0
                    : static_cast<double>(pruned) / static_cast<double>(total);
}

FcnModel CompressionConstraint::ForwardModel(const FcnModel& latent) const {
  if (kind_ != CompressionKind::kFakeQuant) return latent;
  FcnModel q = latent;
  for (auto& w : q.weights) QuantizeInPlace(Flat(w), QuantRange(Flat(w)));
  return q;
}

void CompressionConstraint::AdjustGradients(Gradients& gradients) const {
  switch (kind_) {
    case CompressionKind::kPruneMask:
      for (size_t l = 0; l < masks_.size(); ++l) {
        double* g = gradients.weights[l].data();
        for (size_t i = 0; i < masks_[l].size(); ++i) {
          if (masks_[l][i] == 0) g[i] = 0.0;
        }
      }
      break;
    case CompressionKind::kClusterAssignment:
      for (size_t l = 0; l < clusters_.size(); ++l) {
        const auto& layer = clusters_[l];
        double* g = gradients.weights[l].data();
        std::vector<double> sums(layer.centroids.size(), 0.0);
        for (size_t i = 0; i < layer.assignment.size(); ++i) {
          sums[layer.assignment[i]] += g[i];
        }
        for (size_t i = 0; i < layer.assignment.size(); ++i) {
          g[i] = sums[layer.assignment[i]];
        }
      }
      break;
    case CompressionKind::kFakeQuant:
      break;
  }
}

void CompressionConstraint::Project(FcnModel& model) const {
  switch (kind_) {
    case CompressionKind::kPruneMask:
      for (size_t l = 0; l < masks_.size(); ++l) {
        double* w = model.weights[l].data();
        for (size_t i = 0; i < masks_[l].size(); ++i) {
          if (masks_[l][i] == 0) w[i] = 0.0;
        }
      }
      break;
    case CompressionKind::kClusterAssignment:
      // Members received identical updates; copying the first member's value
      // keeps them bit-identical even if a caller perturbed one.
      for (size_t l = 0; l < clusters_.size(); ++l) {
        const auto& layer = clusters_[l];
        double* w = model.weights[l].data();
        std::vector<double> value(layer.centroids.size(),
                                  std::numeric_limits<double>::quiet_NaN());
        std::vector<uint8_t> seen(layer.centroids.size(), 0);
        for (size_t i = 0; i < layer.assignment.size(); ++i) {
          const uint32_t c = layer.assignment[i];
          if (!seen[c]) {
            seen[c] = 1;
            value[c] = w[i];
          }
          w[i] = value[c];
        }
      }
      break;
    case CompressionKind::kFakeQuant:
      break;
  }
}

void CompressionConstraint::Check(const FcnModel& model) const {
  switch (kind_) {
    case CompressionKind::kPruneMask:
      CheckLayerCount(masks_.size(), model);
      for (size_t l = 0; l < masks_.size(); ++l) {
        if (masks_[l].size() != static_cast<size_t>(model.weights[l].size())) {
          throw Error(ErrorCode::kShape, "prune mask size mismatch");
        }
        const double* w = model.weights[l].data();
        for (size_t i = 0; i < masks_[l].size(); ++i) {
          if (masks_[l][i] == 0 && w[i] != 0.0) {
            throw Error(ErrorCode::kValidation,
                        fmt::format("pruned weight {} of layer {} is {}", i, l,
                                    w[i]));
          }
        }
      }
      break;
    case CompressionKind::kClusterAssignment:
      CheckLayerCount(clusters_.size(), model);
      for (size_t l = 0; l < clusters_.size(); ++l) {
        const auto& layer = clusters_[l];
        if (layer.assignment.size() !=
            static_cast<size_t>(model.weights[l].size())) {
          throw Error(ErrorCode::kShape, "cluster assignment size mismatch");
        }
        const double* w = model.weights[l].data();
        for (size_t i = 0; i < layer.assignment.size(); ++i) {
          if (layer.assignment[i] >= layer.centroids.size() ||
              w[i] != layer.centroids[layer.assignment[i]]) {
            throw Error(ErrorCode::kValidation,
                        fmt::format("weight {} of layer {} is off its centroid",
                                    i, l));
          }
        }
      }
      break;
    case CompressionKind::kFakeQuant:
      CheckLayerCount(ranges_.size(), model);
      for (size_t l = 0; l < ranges_.size(); ++l) {
        if (!(ranges_[l] > 0.0)) {
          throw Error(ErrorCode::kValidation, "non-positive quant scale");
        }
        const double* w = model.weights[l].data();
        for (Eigen::Index i = 0; i < model.weights[l].size(); ++i) {
          const double r = w[i] * kInt8Max / ranges_[l];
          if (std::abs(r) > kInt8Max + 1e-9 ||
              DequantizeValue(QuantizeValue(w[i], ranges_[l]), ranges_[l]) !=
                  w[i]) {
            throw Error(ErrorCode::kValidation,
                        fmt::format("weight {} of layer {} is off the int8 "
                                    "grid",
                                    i, l));
          }
        }
      }
      break;
  }
}

bool CompressionConstraint::IsSatisfiedBy(const FcnModel& model) const {
  try {
    Check(model);
    return true;
  } catch (const Error&) {
    return false;
  }
}

void CompressionConstraint::RefreshFrom(const FcnModel& model) {
  switch (kind_) {
    case CompressionKind::kPruneMask:
      break;
    case CompressionKind::kClusterAssignment:
      CheckLayerCount(clusters_.size(), model);
      for (size_t l = 0; l < clusters_.size(); ++l) {
        auto& layer = clusters_[l];
        const double* w = model.weights[l].data();
        std::vector<uint8_t> seen(layer.centroids.size(), 0);
        for (size_t i = 0; i < layer.assignment.size(); ++i) {
          const uint32_t c = layer.assignment[i];
          if (!seen[c]) {
            seen[c] = 1;
            layer.centroids[c] = w[i];
          }
        }
      }
      break;
    case CompressionKind::kFakeQuant:
      CheckLayerCount(ranges_.size(), model);
      for (size_t l = 0; l < ranges_.size(); ++l) {
        ranges_[l] = QuantRange(FlatSpan(model.weights[l]));
      }
      break;
  }
}

bool operator==(const CompressionConstraint& a,
                const CompressionConstraint& b) {
  if (a.kind_ != b.kind_ || a.masks_ != b.masks_ || a.ranges_ != b.ranges_ ||
      a.clusters_.size() != b.clusters_.size()) {
    return false;
  }
  for (size_t l = 0; l < a.clusters_.size(); ++l) {
    if (a.clusters_[l].assignment != b.clusters_[l].assignment ||
        a.clusters_[l].centroids != b.clusters_[l].centroids) {
      return false;
    }
  }
  return true;
}

std::string CompressedModel::Name() const {
  switch (family()) {
    case CompressionKind::kPruneMask:
      return fmt::format("prune{}", degree_tag);
    case CompressionKind::kClusterAssignment:
      return fmt::format("cluster{}", 256 - degree_tag);
    case CompressionKind::kFakeQuant:
      return "int8";
  }
  return "unknown";
}

int ClusterDegreeTag(int n_clusters) { return 256 - n_clusters; }

CompressedModel PruneL1(const FcnModel& model, double sparsity,
                        PruneScope scope) {
  if (!(sparsity >= 0.0 && sparsity <= 1.0)) {
    throw Error(ErrorCode::kConfiguration,
                fmt::format("sparsity {} outside [0, 1]", sparsity));
  }
  model.Validate();
  CompressedModel out;
  out.model = model;
  std::vector<std::vector<uint8_t>> masks;
  for (const auto& w : model.weights) {
    masks.emplace_back(static_cast<size_t>(w.size()), uint8_t{1});
  }

  struct Entry {
    double magnitude;
    uint32_t layer;
    uint32_t index;
  };
  auto by_magnitude = [](const Entry& a, const Entry& b) {
    if (a.magnitude != b.magnitude) return a.magnitude < b.magnitude;
    if (a.layer != b.layer) return a.layer < b.layer;
    return a.index < b.index;
  };
  auto prune_smallest = [&](std::vector<Entry>& entries) {
    const size_t k = CountForFraction(sparsity, entries.size());
    if (k == 0) return;
    std::nth_element(entries.begin(),
                     entries.begin() + static_cast<std::ptrdiff_t>(k - 1),
                     entries.end(), by_magnitude);
    for (size_t i = 0; i < k; ++i) {
      masks[entries[i].layer][entries[i].index] = 0;
      out.model.weights[entries[i].layer].data()[entries[i].index] = 0.0;
    }
  };

  if (scope == PruneScope::kGlobal) {
    std::vector<Entry> entries;
    entries.reserve(model.weight_count());
    for (uint32_t l = 0; l < model.num_layers(); ++l) {
      const double* w = model.weights[l].data();
      for (uint32_t i = 0; i < model.weights[l].size(); ++i) {
        entries.push_back({std::abs(w[i]), l, i});
      }
    }
    prune_smallest(entries);
  } else {
    for (uint32_t l = 0; l < model.num_layers(); ++l) {
      std::vector<Entry> entries;
      const double* w = model.weights[l].data();
      for (uint32_t i = 0; i < model.weights[l].size(); ++i) {
        entries.push_back({std::abs(w[i]), l, i});
      }
      prune_smallest(entries);
    }
  }
  out.constraint = CompressionConstraint::PruneMask(std::move(masks));
  out.degree_tag = static_cast<int>(std::lround(sparsity * 100.0));
  return out;
}

CompressedModel FinetuneCompressed(const CompressedModel& compressed,
                                   const TabularDataset& train_set,
                                   const TabularDataset& valid_set,
                                   const TrainConfig& config,
                                   const DpConfig* dp) {
  compressed.constraint.Check(compressed.model);
  TrainOptions options;
  options.constraint = &compressed.constraint;
  options.dp = dp;
  CompressedModel out = compressed;
  out.model =
      TrainWithHistory(compressed.model, train_set, valid_set, config, options)
          .model;
  if (out.family() == CompressionKind::kFakeQuant) {
    for (auto& w : out.model.weights) {
      QuantizeInPlace(Flat(w), QuantRange(Flat(w)));
    }
  }
  out.constraint.RefreshFrom(out.model);
  out.constraint.Check(out.model);
  return out;
}

CompressedModel QuantizeInt8(const FcnModel& model, QuantMode mode,
                             const QatSettings& qat) {
  model.Validate();
  CompressedModel out;
  out.model = model;
  std::vector<double> ranges;
  for (auto& w : out.model.weights) {
    const double range = QuantRange(Flat(w));
    QuantizeInPlace(Flat(w), range);
    ranges.push_back(range);
  }
  out.constraint = CompressionConstraint::FakeQuant(std::move(ranges));
  out.degree_tag = 8;
  if (mode == QuantMode::kPostTraining) return out;

  if (qat.train_set == nullptr) {
    throw Error(ErrorCode::kConfiguration,
                "quantization-aware training needs a training set");
  }
  // Fine-tuning starts from the float weights; the forward pass sees their
  // quantized image.
  TrainOptions options;
  options.constraint = &out.constraint;
  options.dp = qat.dp;
  const TabularDataset& valid =
      qat.valid_set != nullptr ? *qat.valid_set : *qat.train_set;
  FcnModel trained =
      TrainWithHistory(model, *qat.train_set, valid, qat.config, options)
          .model;
  return QuantizeInt8(trained, QuantMode::kPostTraining);
}

KMeansResult KMeans1D(std::span<const double> values, int k, uint64_t seed,
                      int max_iterations, double tolerance) {
  if (k < 1) throw Error(ErrorCode::kConfiguration, "k must be >= 1");
  if (values.empty()) throw Error(ErrorCode::kSize, "no values to cluster");
  const std::set<double> distinct(values.begin(), values.end());
  const size_t clusters = std::min(static_cast<size_t>(k), distinct.size());
  const size_t n = values.size();

  // k-means++ seeding over the raw values.
  std::mt19937_64 rng(seed);
  KMeansResult result;
  std::uniform_int_distribution<size_t> pick(0, n - 1);
  result.centroids.push_back(values[pick(rng)]);
  std::vector<double> d2(n);
  while (result.centroids.size() < clusters) {
    double total = 0.0;
    for (size_t i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (double c : result.centroids) {
        best = std::min(best, (values[i] - c) * (values[i] - c));
      }
      d2[i] = best;
      total += best;
    }
    const double target =
        std::uniform_real_distribution<double>(0.0, total)(rng);
    double acc = 0.0;
    size_t chosen = n;
    for (size_t i = 0; i < n; ++i) {
      if (d2[i] == 0.0) continue;
      chosen = i;
      acc += d2[i];
      if (acc > target) break;
    }
    result.centroids.push_back(values[chosen]);
  }

  result.assignment.assign(n, 0);
  std::vector<std::vector<uint32_t>> members(clusters);
  for (int iter = 0; iter < std::max(1, max_iterations); ++iter) {
    double sse = 0.0;
    for (auto& m : members) m.clear();
    for (size_t i = 0; i < n; ++i) {
      uint32_t best_c = 0;
      double best = std::numeric_limits<double>::infinity();
      for (uint32_t c = 0; c < clusters; ++c) {
        const double d = (values[i] - result.centroids[c]) *
                         (values[i] - result.centroids[c]);
        if (d < best) {
          best = d;
          best_c = c;
        }
      }
      result.assignment[i] = best_c;
      members[best_c].push_back(static_cast<uint32_t>(i));
      sse += best;
    }
    result.sse_history.push_back(sse);
    double shift = 0.0;
    for (size_t c = 0; c < clusters; ++c) {
      if (members[c].empty()) continue;  // keep an empty cluster in place
      const double updated = StableMean(values, members[c]);
      shift = std::max(shift, std::abs(updated - result.centroids[c]));
      result.centroids[c] = updated;
    }
    if (shift <= tolerance) break;
  }
  return result;
}

CompressedModel ClusterWeights(const FcnModel& model, int n_clusters,
                               uint64_t seed) {
  if (n_clusters < 1) {
    throw Error(ErrorCode::kConfiguration, "cluster count must be >= 1");
  }
  model.Validate();
  CompressedModel out;
  out.model = model;
  std::vector<LayerClusters> layers;
  for (size_t l = 0; l < model.num_layers(); ++l) {
    Matrix& w = out.model.weights[l];
    KMeansResult km =
        KMeans1D(FlatSpan(model.weights[l]), n_clusters, DeriveSeed(seed, l));
    LayerClusters layer{std::move(km.assignment), std::move(km.centroids)};
    double* data = w.data();
    for (size_t i = 0; i < layer.assignment.size(); ++i) {
      data[i] = layer.centroids[layer.assignment[i]];
    }
    layers.push_back(std::move(layer));
  }
  out.constraint = CompressionConstraint::Clusters(std::move(layers));
  out.degree_tag = ClusterDegreeTag(n_clusters);
  return out;
}

void SaveCompressedModel(const std::filesystem::path& path,
                         const CompressedModel& compressed) {
  BinaryWriter out;
  out.WriteHeader(CheckpointKind::kCompressedModel);
  WriteFcnModel(out, compressed.model);
  const auto& c = compressed.constraint;
  out.WriteU32(static_cast<uint32_t>(c.kind()));
  out.WriteI32(compressed.degree_tag);
  switch (c.kind()) {
    case CompressionKind::kPruneMask:
      out.WriteU32(static_cast<uint32_t>(c.prune_masks().size()));
      for (const auto& mask : c.prune_masks()) {
        out.WriteU32(static_cast<uint32_t>(mask.size()));
        // Bitmap, least significant bit first.
        for (size_t i = 0; i < mask.size(); i += 8) {
          uint8_t byte = 0;
          for (size_t b = 0; b < 8 && i + b < mask.size(); ++b) {
            if (mask[i + b] != 0) byte |= static_cast<uint8_t>(1u << b);
          }
          out.WriteU8(byte);
        }
      }
      break;
    case CompressionKind::kClusterAssignment:
      out.WriteU32(static_cast<uint32_t>(c.clusters().size()));
      for (const auto& layer : c.clusters()) {
        out.WriteU32(static_cast<uint32_t>(layer.centroids.size()));
        out.WriteF64s(layer.centroids);
        out.WriteU32(static_cast<uint32_t>(layer.assignment.size()));
        for (uint32_t a : layer.assignment) out.WriteU32(a);
      }
      break;
    case CompressionKind::kFakeQuant:
      out.WriteU32(static_cast<uint32_t>(c.quant_ranges().size()));
      for (double r : c.quant_ranges()) out.WriteF64(r);
      break;
  }
  out.Save(path);
}

CompressedModel LoadCompressedModel(const std::filesystem::path& path) {
  BinaryReader in = BinaryReader::FromFile(path);
  in.ReadHeader(CheckpointKind::kCompressedModel);
  CompressedModel out;
  out.model = ReadFcnModel(in);
  const uint32_t kind = in.ReadU32();
  out.degree_tag = in.ReadI32();
  const uint32_t layers = in.ReadU32();
  if (layers != out.model.num_layers()) {
    throw Error(ErrorCode::kParse, "constraint layer count mismatch");
  }
  switch (static_cast<CompressionKind>(kind)) {
    case CompressionKind::kPruneMask: {
      std::vector<std::vector<uint8_t>> masks(layers);
      for (auto& mask : masks) {
        mask.resize(in.ReadU32());
        for (size_t i = 0; i < mask.size(); i += 8) {
          const uint8_t byte = in.ReadU8();
          for (size_t b = 0; b < 8 && i + b < mask.size(); ++b) {
            mask[i + b] = (byte >> b) & 1u;
          }
        }
      }
      out.constraint = CompressionConstraint::PruneMask(std::move(masks));
      break;
    }
    case CompressionKind::kClusterAssignment: {
      std::vector<LayerClusters> clusters(layers);
      for (auto& layer : clusters) {
        layer.centroids.resize(in.ReadU32());
        for (double& c : layer.centroids) c = in.ReadF64();
        layer.assignment.resize(in.ReadU32());
        for (uint32_t& a : layer.assignment) a = in.ReadU32();
      }
      out.constraint = CompressionConstraint::Clusters(std::move(clusters));
      break;
    }
    case CompressionKind::kFakeQuant: {
      std::vector<double> ranges(layers);
      for (double& r : ranges) r = in.ReadF64();
      out.constraint = CompressionConstraint::FakeQuant(std::move(ranges));
      break;
    }
    default:
      throw Error(ErrorCode::kParse,
                  fmt::format("unknown compression kind {}", kind));
  }
  if (!in.AtEnd()) throw Error(ErrorCode::kParse, "trailing checkpoint bytes");
  out.constraint.Check(out.model);
  return out;
}

}  // namespace leakaudit
