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

#include "leakaudit/nn.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <numeric>

#include <fmt/format.h>

#include "leakaudit/error.h"

namespace leakaudit {
namespace {

// Activations and pre-activations of one forward pass, kept for backprop.
struct ForwardTrace {
  std::vector<Matrix> inputs;  // inputs[l] feeds layer l (post ReLU/dropout)
  std::vector<Matrix> pre;     // pre-activations of every layer
  Matrix posteriors;
};

void CheckInputs(const FcnModel& model, const Matrix& inputs) {
  if (inputs.cols() != model.input_dim()) {
    throw Error(ErrorCode::kShape,
                fmt::format("input has {} columns, model expects {}",
                            inputs.cols(), model.input_dim()));
  }
  if (!inputs.allFinite()) {
    throw Error(ErrorCode::kInput, "non-finite input value");
  }
}

void CheckLabels(const FcnModel& model, const Matrix& inputs,
                 std::span<const int> labels) {
  if (static_cast<Eigen::Index>(labels.size()) != inputs.rows()) {
    throw Error(ErrorCode::kShape,
                fmt::format("{} labels for {} rows", labels.size(),
                            inputs.rows()));
  }
  for (int y : labels) {
    if (y < 0 || y >= model.output_dim()) {
      throw Error(ErrorCode::kSchema,
                  fmt::format("label {} outside [0, {})", y,
                              model.output_dim()));
    }
  }
}

ForwardTrace RunForward(const FcnModel& model, const Matrix& inputs,
                        const DropoutMasks* masks) {
  ForwardTrace trace;
  const size_t layers = model.num_layers();
  trace.inputs.reserve(layers);
  trace.pre.reserve(layers);
  trace.inputs.push_back(inputs);
  for (size_t l = 0; l < layers; ++l) {
    Matrix z = trace.inputs[l] * model.weights[l].transpose();
    z.rowwise() += model.biases[l].transpose();
    trace.pre.push_back(z);
    if (l + 1 < layers) {
      Matrix a = z.cwiseMax(0.0);
      if (masks != nullptr) a.array() *= (*masks)[l].array();
      trace.inputs.push_back(std::move(a));
    }
  }
  trace.posteriors = Softmax(trace.pre.back());
  return trace;
}

// Per-sample output deltas propagated to every layer. deltas[l] has one row
// per sample and is the derivative of that sample's (unscaled) loss with
// respect to pre[l].
std::vector<Matrix> Backpropagate(const FcnModel& model,
                                  const ForwardTrace& trace,
                                  std::span<const int> labels,
                                  const DropoutMasks* masks) {
  const size_t layers = model.num_layers();
  std::vector<Matrix> deltas(layers);
  Matrix delta = trace.posteriors;
  for (Eigen::Index i = 0; i < delta.rows(); ++i) {
    delta(i, labels[static_cast<size_t>(i)]) -= 1.0;
  }
  deltas[layers - 1] = delta;
  for (size_t l = layers - 1; l > 0; --l) {
    Matrix back = deltas[l] * model.weights[l];
    back.array() *= (trace.pre[l - 1].array() > 0.0).cast<double>();
    if (masks != nullptr) back.array() *= (*masks)[l - 1].array();
    deltas[l - 1] = std::move(back);
  }
  return deltas;
}

double MeanLoss(const Matrix& posteriors, std::span<const int> labels) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < posteriors.rows(); ++i) {
    const double p = posteriors(i, labels[static_cast<size_t>(i)]);
    total += -std::log(std::max(p, kProbabilityFloor));
  }
  return total / static_cast<double>(posteriors.rows());
}

Matrix GatherRows(const Matrix& m, std::span<const size_t> rows) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), m.cols());
  for (size_t i = 0; i < rows.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) =
        m.row(static_cast<Eigen::Index>(rows[i]));
  }
  return out;
}

bool AllFinite(const FcnModel& model) {
  for (size_t l = 0; l < model.num_layers(); ++l) {
    if (!model.weights[l].allFinite() || !model.biases[l].allFinite()) {
      return false;
    }
  }
  return true;
}

}  // namespace

Vector Label::OneHot(int classes) const {
  if (class_index < 0 || class_index >= classes) {
    throw Error(ErrorCode::kSchema,
                fmt::format("label {} outside [0, {})", class_index, classes));
  }
  Vector v = Vector::Zero(classes);
  v[class_index] = 1.0;
  return v;
}

FcnModel FcnModel::Zeros(std::span<const int> layer_sizes) {
  if (layer_sizes.size() < 2) {
    throw Error(ErrorCode::kShape, "a model needs at least two layer sizes");
  }
  FcnModel m;
  m.layer_sizes.assign(layer_sizes.begin(), layer_sizes.end());
  for (int s : m.layer_sizes) {
    if (s <= 0) throw Error(ErrorCode::kShape, "layer sizes must be positive");
  }
  for (size_t l = 0; l + 1 < m.layer_sizes.size(); ++l) {
    m.weights.push_back(Matrix::Zero(m.layer_sizes[l + 1], m.layer_sizes[l]));
    m.biases.push_back(Vector::Zero(m.layer_sizes[l + 1]));
  }
  m.dropout_rates.assign(m.layer_sizes.size() - 2, 0.0);
  return m;
}

FcnModel FcnModel::Create(std::span<const int> layer_sizes, double dropout,
                          uint64_t seed) {
  if (!(dropout >= 0.0 && dropout < 1.0)) {
    throw Error(ErrorCode::kConfiguration, "dropout must lie in [0, 1)");
  }
  FcnModel m = Zeros(layer_sizes);
  std::fill(m.dropout_rates.begin(), m.dropout_rates.end(), dropout);
  std::mt19937_64 rng(seed);
  for (size_t l = 0; l < m.num_layers(); ++l) {
    std::normal_distribution<double> init(
        0.0, std::sqrt(2.0 / static_cast<double>(m.layer_sizes[l])));
    for (Eigen::Index i = 0; i < m.weights[l].size(); ++i) {
      m.weights[l].data()[i] = init(rng);
    }
  }
  return m;
}

size_t FcnModel::weight_count() const {
  size_t n = 0;
  for (const auto& w : weights) n += static_cast<size_t>(w.size());
  return n;
}

void FcnModel::Validate() const {
  if (layer_sizes.size() < 2 || weights.size() != layer_sizes.size() - 1 ||
      biases.size() != weights.size() ||
      dropout_rates.size() != layer_sizes.size() - 2) {
    throw Error(ErrorCode::kShape, "inconsistent layer count");
  }
  for (size_t l = 0; l < weights.size(); ++l) {
    if (weights[l].rows() != layer_sizes[l + 1] ||
        weights[l].cols() != layer_sizes[l] ||
        biases[l].size() != layer_sizes[l + 1]) {
      throw Error(ErrorCode::kShape,
                  fmt::format("layer {} does not match sizes {}x{}", l,
                              layer_sizes[l + 1], layer_sizes[l]));
    }
  }
  for (double r : dropout_rates) {
    if (!(r >= 0.0 && r < 1.0)) {
      throw Error(ErrorCode::kShape, "dropout rate outside [0, 1)");
    }
  }
  if (!AllFinite(*this)) {
    throw Error(ErrorCode::kInput, "non-finite model parameter");
  }
}

bool operator==(const FcnModel& a, const FcnModel& b) {
  if (a.layer_sizes != b.layer_sizes || a.dropout_rates != b.dropout_rates ||
      a.weights.size() != b.weights.size()) {
    return false;
  }
  auto same_bits = [](const double* x, const double* y, Eigen::Index n) {
    return std::memcmp(x, y, static_cast<size_t>(n) * sizeof(double)) == 0;
  };
  for (size_t l = 0; l < a.weights.size(); ++l) {
    if (a.weights[l].rows() != b.weights[l].rows() ||
        a.weights[l].cols() != b.weights[l].cols() ||
        a.biases[l].size() != b.biases[l].size()) {
      return false;
    }
    if (!same_bits(a.weights[l].data(), b.weights[l].data(),
                   a.weights[l].size()) ||
        !same_bits(a.biases[l].data(), b.biases[l].data(),
                   a.biases[l].size())) {
      return false;
    }
  }
  return true;
}

Gradients Gradients::ZerosLike(const FcnModel& model) {
  Gradients g;
  for (size_t l = 0; l < model.num_layers(); ++l) {
    g.weights.push_back(Matrix::Zero(model.weights[l].rows(),
                                     model.weights[l].cols()));
    g.biases.push_back(Vector::Zero(model.biases[l].size()));
  }
  return g;
}

double Gradients::SquaredNorm() const {
  double total = 0.0;
  for (size_t l = 0; l < weights.size(); ++l) {
    total += weights[l].squaredNorm() + biases[l].squaredNorm();
  }
  return total;
}

Matrix Softmax(const Matrix& logits) {
  Matrix out(logits.rows(), logits.cols());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const double max = logits.row(i).maxCoeff();
    out.row(i) = (logits.row(i).array() - max).exp();
    out.row(i) /= out.row(i).sum();
  }
  return out;
}

DropoutMasks DrawDropoutMasks(const FcnModel& model, Eigen::Index rows,
                              std::mt19937_64& rng) {
  DropoutMasks masks;
  for (size_t l = 0; l + 1 < model.num_layers(); ++l) {
    const double rate = model.dropout_rates[l];
    Matrix mask = Matrix::Constant(rows, model.layer_sizes[l + 1], 1.0);
    if (rate > 0.0) {
      std::bernoulli_distribution keep(1.0 - rate);
      const double scale = 1.0 / (1.0 - rate);
      for (Eigen::Index i = 0; i < mask.size(); ++i) {
        mask.data()[i] = keep(rng) ? scale : 0.0;
      }
    }
    masks.push_back(std::move(mask));
  }
  return masks;
}

Matrix Logits(const FcnModel& model, const Matrix& inputs,
              const DropoutMasks* masks) {
  CheckInputs(model, inputs);
  return RunForward(model, inputs, masks).pre.back();
}

Matrix Forward(const FcnModel& model, const Matrix& inputs, bool train_mode,
               uint64_t seed) {
  CheckInputs(model, inputs);
  if (!train_mode) return RunForward(model, inputs, nullptr).posteriors;
  std::mt19937_64 rng(seed);
  const DropoutMasks masks = DrawDropoutMasks(model, inputs.rows(), rng);
  return RunForward(model, inputs, &masks).posteriors;
}

double CrossEntropyLoss(std::span<const double> posterior, const Label& label) {
  if (label.class_index < 0 ||
      label.class_index >= static_cast<int>(posterior.size())) {
    throw Error(ErrorCode::kSchema,
                fmt::format("label {} outside posterior of length {}",
                            label.class_index, posterior.size()));
  }
  return -std::log(std::max(posterior[label.class_index], kProbabilityFloor));
}

std::vector<double> PerSampleLosses(const Matrix& posteriors,
                                    std::span<const int> labels) {
  if (static_cast<Eigen::Index>(labels.size()) != posteriors.rows()) {
    throw Error(ErrorCode::kShape, "one label per posterior row required");
  }
  std::vector<double> losses(labels.size());
  for (size_t i = 0; i < labels.size(); ++i) {
    losses[i] = CrossEntropyLoss(
        RowSpan(posteriors, static_cast<Eigen::Index>(i)), Label{labels[i]});
  }
  return losses;
}

double Accuracy(const FcnModel& model, const TabularDataset& data) {
  if (data.size() == 0) return 0.0;
  const Matrix logits = Logits(model, data.features);
  size_t correct = 0;
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    Eigen::Index arg;
    logits.row(i).maxCoeff(&arg);
    if (arg == data.labels[static_cast<size_t>(i)]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

LossAndGradient ComputeLossAndGradient(const FcnModel& model,
                                       const Matrix& inputs,
                                       std::span<const int> labels,
                                       double l2_lambda,
                                       const DropoutMasks* masks) {
  CheckInputs(model, inputs);
  CheckLabels(model, inputs, labels);
  const ForwardTrace trace = RunForward(model, inputs, masks);
  const std::vector<Matrix> deltas =
      Backpropagate(model, trace, labels, masks);
  const double inv_n = 1.0 / static_cast<double>(inputs.rows());

  LossAndGradient out;
  out.loss = MeanLoss(trace.posteriors, labels);
  for (size_t l = 0; l < model.num_layers(); ++l) {
    Matrix gw = (deltas[l].transpose() * trace.inputs[l]) * inv_n;
    if (l2_lambda != 0.0) gw += l2_lambda * model.weights[l];
    out.gradients.weights.push_back(std::move(gw));
    out.gradients.biases.push_back(deltas[l].colwise().sum().transpose() *
                                   inv_n);
    out.loss += 0.5 * l2_lambda * model.weights[l].squaredNorm();
  }
  return out;
}

void DpConfig::Validate() const {
  if (!(clip_norm > 0.0)) {
    throw Error(ErrorCode::kConfiguration, "clip norm must be positive");
  }
  if (!(noise_multiplier >= 0.0) || !std::isfinite(noise_multiplier)) {
    throw Error(ErrorCode::kConfiguration,
                "noise multiplier must be finite and non-negative");
  }
  if (!(delta > 0.0 && delta < 1.0)) {
    throw Error(ErrorCode::kConfiguration, "delta must lie in (0, 1)");
  }
}

LossAndGradient DpGradient(const FcnModel& model, const Matrix& inputs,
                           std::span<const int> labels, const DpConfig& dp,
                           std::mt19937_64& noise_rng,
                           const DropoutMasks* masks,
                           std::vector<double>* per_sample_norms) {
  dp.Validate();
  CheckInputs(model, inputs);
  CheckLabels(model, inputs, labels);
  const ForwardTrace trace = RunForward(model, inputs, masks);
  std::vector<Matrix> deltas = Backpropagate(model, trace, labels, masks);
  const Eigen::Index n = inputs.rows();

  // A per-sample weight gradient is the outer product delta_i a_i^T, so its
  // squared Frobenius norm is |delta_i|^2 |a_i|^2; the bias part adds
  // |delta_i|^2.
  Vector sq_norm = Vector::Zero(n);
  for (size_t l = 0; l < model.num_layers(); ++l) {
    const Vector d2 = deltas[l].rowwise().squaredNorm();
    const Vector a2 = trace.inputs[l].rowwise().squaredNorm();
    sq_norm.array() += d2.array() * (a2.array() + 1.0);
  }
  Vector scale(n);
  if (per_sample_norms != nullptr) per_sample_norms->resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double norm = std::sqrt(sq_norm[i]);
    if (per_sample_norms != nullptr) (*per_sample_norms)[i] = norm;
    scale[i] = norm > dp.clip_norm ? dp.clip_norm / norm : 1.0;
  }

  LossAndGradient out;
  out.loss = MeanLoss(trace.posteriors, labels);
  const double inv_n = 1.0 / static_cast<double>(n);
  const double noise_std = dp.noise_multiplier * dp.clip_norm;
  std::normal_distribution<double> noise(0.0, 1.0);
  for (size_t l = 0; l < model.num_layers(); ++l) {
    const Matrix clipped = scale.asDiagonal() * deltas[l];
    Matrix gw = clipped.transpose() * trace.inputs[l];
    Vector gb = clipped.colwise().sum().transpose();
    if (noise_std > 0.0) {
      for (Eigen::Index i = 0; i < gw.size(); ++i) {
        gw.data()[i] += noise_std * noise(noise_rng);
      }
      for (Eigen::Index i = 0; i < gb.size(); ++i) {
        gb[i] += noise_std * noise(noise_rng);
      }
    }
    out.gradients.weights.push_back(gw * inv_n);
    out.gradients.biases.push_back(gb * inv_n);
  }
  return out;
}

void TrainConfig::Validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw Error(ErrorCode::kConfiguration, "learning rate must be positive");
  }
  if (batch_size <= 0) {
    throw Error(ErrorCode::kConfiguration, "batch size must be positive");
  }
  if (max_epochs < 0) {
    throw Error(ErrorCode::kConfiguration, "max epochs must be non-negative");
  }
  if (!(l2_lambda >= 0.0)) {
    throw Error(ErrorCode::kConfiguration, "l2 lambda must be non-negative");
  }
  if (early_stop_patience < 0) {
    throw Error(ErrorCode::kConfiguration, "patience must be non-negative");
  }
  if (!(momentum >= 0.0 && momentum < 1.0)) {
    throw Error(ErrorCode::kConfiguration, "momentum must lie in [0, 1)");
  }
}

TrainOutcome TrainWithHistory(const FcnModel& model,
                              const TabularDataset& train_set,
                              const TabularDataset& valid_set,
                              const TrainConfig& config,
                              const TrainOptions& options) {
  config.Validate();
  model.Validate();
  if (options.dp != nullptr) options.dp->Validate();
  if (train_set.size() == 0 || valid_set.size() == 0) {
    throw Error(ErrorCode::kSize, "training and validation sets must be "
                                  "non-empty");
  }
  CheckInputs(model, train_set.features);
  CheckLabels(model, train_set.features, train_set.labels);
  CheckInputs(model, valid_set.features);
  CheckLabels(model, valid_set.features, valid_set.labels);

  const TrainingConstraint* constraint = options.constraint;
  const bool fake_forward =
      constraint != nullptr && constraint->TransformsForward();
  auto forward_model = [&](const FcnModel& latent) {
    return fake_forward ? constraint->ForwardModel(latent) : latent;
  };

  std::mt19937_64 shuffle_rng(config.seed);
  std::mt19937_64 dropout_rng(DeriveSeed(config.seed, 1));
  std::mt19937_64 noise_rng(DeriveSeed(config.seed, 2));

  TrainOutcome outcome{model, {}, -1};
  FcnModel params = model;
  const bool early_stopping = config.early_stop_patience > 0;
  double best_accuracy = early_stopping
                             ? Accuracy(forward_model(params), valid_set)
                             : -1.0;
  int epochs_without_gain = 0;
  Gradients velocity;
  if (config.momentum > 0.0) velocity = Gradients::ZerosLike(params);

  std::vector<size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), size_t{0});
  const size_t batch = static_cast<size_t>(config.batch_size);
  int64_t step = 0;

  for (int epoch = 0; epoch < config.max_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double loss_sum = 0.0;
    size_t batches = 0;
    for (size_t start = 0; start < order.size(); start += batch) {
      const size_t end = std::min(order.size(), start + batch);
      const std::span<const size_t> rows(order.data() + start, end - start);
      const Matrix x = GatherRows(train_set.features, rows);
      std::vector<int> y(rows.size());
      for (size_t i = 0; i < rows.size(); ++i) y[i] = train_set.labels[rows[i]];

      const FcnModel fwd = forward_model(params);
      const DropoutMasks masks = DrawDropoutMasks(fwd, x.rows(), dropout_rng);
      LossAndGradient lg =
          options.dp != nullptr
              ? DpGradient(fwd, x, y, *options.dp, noise_rng, &masks)
              : ComputeLossAndGradient(fwd, x, y, 0.0, &masks);
      if (!std::isfinite(lg.loss)) {
        throw Error(ErrorCode::kTraining,
                    fmt::format("loss diverged at epoch {}", epoch));
      }
      Gradients& g = lg.gradients;
      if (config.l2_lambda != 0.0) {
        for (size_t l = 0; l < params.num_layers(); ++l) {
          g.weights[l] += config.l2_lambda * params.weights[l];
        }
      }
      if (constraint != nullptr) constraint->AdjustGradients(g);

      for (size_t l = 0; l < params.num_layers(); ++l) {
        if (config.momentum > 0.0) {
          velocity.weights[l] = config.momentum * velocity.weights[l] +
                                g.weights[l];
          velocity.biases[l] = config.momentum * velocity.biases[l] +
                               g.biases[l];
          params.weights[l] -= config.learning_rate * velocity.weights[l];
          params.biases[l] -= config.learning_rate * velocity.biases[l];
        } else {
          params.weights[l] -= config.learning_rate * g.weights[l];
          params.biases[l] -= config.learning_rate * g.biases[l];
        }
      }
      if (constraint != nullptr) constraint->Project(params);
      if (!AllFinite(params)) {
        throw Error(ErrorCode::kTraining,
                    fmt::format("parameters diverged at epoch {}", epoch));
      }
      if (options.after_step) options.after_step(step, params);
      ++step;
      loss_sum += lg.loss;
      ++batches;
    }

    EpochStats stats{epoch, loss_sum / static_cast<double>(batches), -1.0};
    if (early_stopping) {
      stats.valid_accuracy = Accuracy(forward_model(params), valid_set);
      if (stats.valid_accuracy > best_accuracy) {
        best_accuracy = stats.valid_accuracy;
        outcome.model = params;
        outcome.best_epoch = epoch;
        epochs_without_gain = 0;
      } else {
        ++epochs_without_gain;
      }
    }
    outcome.history.push_back(stats);
    if (early_stopping && epochs_without_gain >= config.early_stop_patience) {
      break;
    }
  }
  if (!early_stopping) {
    outcome.model = std::move(params);
    outcome.best_epoch = config.max_epochs - 1;
  }
  return outcome;
}

FcnModel Train(const FcnModel& model, const TabularDataset& train_set,
               const TabularDataset& valid_set, const TrainConfig& config,
               const TrainingConstraint* constraint) {
  TrainOptions options;
  options.constraint = constraint;
  return TrainWithHistory(model, train_set, valid_set, config, options).model;
}

FcnModel TrainDpSgd(const FcnModel& model, const TabularDataset& train_set,
                    const TrainConfig& config, const DpConfig& dp,
                    const TrainingConstraint* constraint) {
  TrainOptions options;
  options.constraint = constraint;
  options.dp = &dp;
  return TrainWithHistory(model, train_set, train_set, config, options).model;
}

void WriteFcnModel(BinaryWriter& out, const FcnModel& model) {
  out.WriteU32(static_cast<uint32_t>(model.layer_sizes.size()));
  for (int s : model.layer_sizes) out.WriteI32(s);
  for (double r : model.dropout_rates) out.WriteF64(r);
  for (size_t l = 0; l < model.num_layers(); ++l) {
    out.WriteF64s(FlatSpan(model.weights[l]));
    out.WriteF64s({model.biases[l].data(),
                   static_cast<size_t>(model.biases[l].size())});
  }
}

FcnModel ReadFcnModel(BinaryReader& in) {
  const uint32_t count = in.ReadU32();
  if (count < 2 || count > 64) {
    throw Error(ErrorCode::kParse, "implausible layer count in checkpoint");
  }
  std::vector<int> sizes(count);
  for (auto& s : sizes) s = in.ReadI32();
  FcnModel m = FcnModel::Zeros(sizes);
  for (auto& r : m.dropout_rates) r = in.ReadF64();
  for (size_t l = 0; l < m.num_layers(); ++l) {
    for (Eigen::Index i = 0; i < m.weights[l].size(); ++i) {
      m.weights[l].data()[i] = in.ReadF64();
    }
    for (Eigen::Index i = 0; i < m.biases[l].size(); ++i) {
      m.biases[l][i] = in.ReadF64();
    }
  }
  m.Validate();
  return m;
}

void SaveFcnModel(const std::filesystem::path& path, const FcnModel& model) {
  BinaryWriter out;
  out.WriteHeader(CheckpointKind::kFcnModel);
  WriteFcnModel(out, model);
  out.Save(path);
}

FcnModel LoadFcnModel(const std::filesystem::path& path) {
  BinaryReader in = BinaryReader::FromFile(path);
  in.ReadHeader(CheckpointKind::kFcnModel);
  FcnModel m = ReadFcnModel(in);
  if (!in.AtEnd()) throw Error(ErrorCode::kParse, "trailing checkpoint bytes");
  return m;
}

}  // namespace leakaudit
