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

#ifndef LEAKAUDIT_NN_H_
#define LEAKAUDIT_NN_H_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <random>
#include <span>
#include <vector>

#include "leakaudit/binary_io.h"
#include "leakaudit/data.h"
#include "leakaudit/tensor.h"

namespace leakaudit {

// Lower clamp applied to probabilities before taking logs, so losses and
// attack features stay finite.
inline constexpr double kProbabilityFloor = 1e-12;

struct Label {
  int class_index = 0;

  // Length-`classes` indicator vector with a single 1.
  Vector OneHot(int classes) const;
};

// Dense feed-forward classifier: ReLU hidden layers, identity output layer.
// Posteriors are produced by applying softmax at inference time only.
struct FcnModel {
  std::vector<int> layer_sizes;  // [in, hidden..., out]
  std::vector<Matrix> weights;   // weights[l] is layer_sizes[l+1] x layer_sizes[l]
  std::vector<Vector> biases;    // biases[l] has layer_sizes[l+1] entries
  std::vector<double> dropout_rates;  // one per hidden layer, in [0, 1)

  // He-normal weights, zero biases.
  static FcnModel Create(std::span<const int> layer_sizes, double dropout,
                         uint64_t seed);
  static FcnModel Zeros(std::span<const int> layer_sizes);

  int input_dim() const { return layer_sizes.front(); }
  int output_dim() const { return layer_sizes.back(); }
  size_t num_layers() const { return weights.size(); }
  size_t weight_count() const;

  // Throws kShape on inconsistent dimensions, kInput on non-finite values.
  void Validate() const;

  // Bitwise parameter equality.
  friend bool operator==(const FcnModel& a, const FcnModel& b);
};

// Parameter-shaped container for gradients and optimizer state.
struct Gradients {
  std::vector<Matrix> weights;
  std::vector<Vector> biases;

  static Gradients ZerosLike(const FcnModel& model);
  double SquaredNorm() const;
};

// Numerically stable row-wise softmax.
Matrix Softmax(const Matrix& logits);

// One matrix per hidden layer, entries 0 or 1/(1-rate) (inverted dropout).
using DropoutMasks = std::vector<Matrix>;
DropoutMasks DrawDropoutMasks(const FcnModel& model, Eigen::Index rows,
                              std::mt19937_64& rng);

Matrix Logits(const FcnModel& model, const Matrix& inputs,
              const DropoutMasks* masks = nullptr);

// Row-wise posteriors. With train_mode the dropout masks are drawn from a
// generator seeded with `seed`; otherwise dropout is off and `seed` unused.
Matrix Forward(const FcnModel& model, const Matrix& inputs,
               bool train_mode = false, uint64_t seed = 0);

// -log(max(p_y, 1e-12)), in nats.
double CrossEntropyLoss(std::span<const double> posterior, const Label& label);

std::vector<double> PerSampleLosses(const Matrix& posteriors,
                                    std::span<const int> labels);

// Fraction of rows whose arg-max class (lowest index on ties) equals the
// label.
double Accuracy(const FcnModel& model, const TabularDataset& data);

struct LossAndGradient {
  double loss = 0.0;  // mean cross-entropy of the data term
  Gradients gradients;
};

// Gradient of mean cross-entropy over the rows plus 0.5 * l2 * sum(W^2)
// (weights only; biases are not regularized).
LossAndGradient ComputeLossAndGradient(const FcnModel& model,
                                       const Matrix& inputs,
                                       std::span<const int> labels,
                                       double l2_lambda,
                                       const DropoutMasks* masks = nullptr);

struct DpConfig {
  double clip_norm = 1.0;
  double noise_multiplier = 0.0;
  double delta = 1e-5;  // reported only

  void Validate() const;
};

// DP-SGD gradient of the data term: every per-sample gradient is scaled to
// norm <= clip_norm, the clipped gradients are summed, Gaussian noise with
// std noise_multiplier * clip_norm is added per coordinate and the result is
// divided by the batch size. `per_sample_norms`, when given, receives the
// unclipped norms.
LossAndGradient DpGradient(const FcnModel& model, const Matrix& inputs,
                           std::span<const int> labels, const DpConfig& dp,
                           std::mt19937_64& noise_rng,
                           const DropoutMasks* masks = nullptr,
                           std::vector<double>* per_sample_norms = nullptr);

// Hook through which compression keeps a model inside its constraint set
// during training.
class TrainingConstraint {
 public:
  virtual ~TrainingConstraint() = default;

  // True when forward passes must use ForwardModel() instead of the latent
  // parameters (fake quantization).
  virtual bool TransformsForward() const { return false; }
  virtual FcnModel ForwardModel(const FcnModel& latent) const {
    return latent;
  }
  // Called on the full (regularized) gradient before the update.
  virtual void AdjustGradients(Gradients& /*gradients*/) const {}
  // Called on the parameters after every update.
  virtual void Project(FcnModel& /*model*/) const {}
};

struct TrainConfig {
  double learning_rate = 0.05;
  int batch_size = 32;
  int max_epochs = 50;
  double l2_lambda = 0.0;
  // 0 disables early stopping: the final parameters are returned. Otherwise
  // training stops after this many epochs without a validation-accuracy
  // improvement and the best snapshot is returned.
  int early_stop_patience = 0;
  double momentum = 0.0;
  uint64_t seed = 0;

  void Validate() const;
};

struct EpochStats {
  int epoch = 0;
  double mean_loss = 0.0;
  double valid_accuracy = -1.0;  // -1 when not evaluated
};

struct TrainOutcome {
  FcnModel model;
  std::vector<EpochStats> history;
  int best_epoch = -1;  // -1: initial parameters
};

struct TrainOptions {
  const TrainingConstraint* constraint = nullptr;
  const DpConfig* dp = nullptr;  // enables DP-SGD gradients
  std::function<void(int64_t step, const FcnModel& params)> after_step;
};

// Mini-batch SGD on cross-entropy. Deterministic in config.seed. Throws
// kTraining naming the epoch when the loss or parameters become non-finite.
TrainOutcome TrainWithHistory(const FcnModel& model,
                              const TabularDataset& train_set,
                              const TabularDataset& valid_set,
                              const TrainConfig& config,
                              const TrainOptions& options = {});

FcnModel Train(const FcnModel& model, const TabularDataset& train_set,
               const TabularDataset& valid_set, const TrainConfig& config,
               const TrainingConstraint* constraint = nullptr);

// DP-SGD training; snapshot selection (when patience > 0) uses training
// accuracy since no validation set is supplied.
FcnModel TrainDpSgd(const FcnModel& model, const TabularDataset& train_set,
                    const TrainConfig& config, const DpConfig& dp,
                    const TrainingConstraint* constraint = nullptr);

void WriteFcnModel(BinaryWriter& out, const FcnModel& model);
FcnModel ReadFcnModel(BinaryReader& in);
void SaveFcnModel(const std::filesystem::path& path, const FcnModel& model);
FcnModel LoadFcnModel(const std::filesystem::path& path);

}  // namespace leakaudit

#endif  // LEAKAUDIT_NN_H_
