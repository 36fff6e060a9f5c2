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

#ifndef LEAKAUDIT_TENSOR_H_
#define LEAKAUDIT_TENSOR_H_

#include <Eigen/Core>
#include <cstdint>
#include <span>

namespace leakaudit {

// Row-major: flat index row * cols + col, as in checkpoints, prune masks and
// cluster assignments.
using Matrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

inline std::span<const double> RowSpan(const Matrix& m, Eigen::Index row) {
  return {m.data() + row * m.cols(), static_cast<size_t>(m.cols())};
}

inline std::span<double> MutableRowSpan(Matrix& m, Eigen::Index row) {
  return {m.data() + row * m.cols(), static_cast<size_t>(m.cols())};
}

inline std::span<const double> FlatSpan(const Matrix& m) {
  return {m.data(), static_cast<size_t>(m.size())};
}

// SplitMix64 finalizer. Used to derive independent, reproducible seeds for
// sub-tasks (trees, layers, repetitions) from a single base seed.
inline uint64_t MixSeed(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline uint64_t DeriveSeed(uint64_t base, uint64_t stream) {
  return MixSeed(base ^ MixSeed(stream + 0x632be59bd9b4e019ULL));
}

}  // namespace leakaudit

#endif  // LEAKAUDIT_TENSOR_H_
