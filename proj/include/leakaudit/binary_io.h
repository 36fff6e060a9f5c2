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

#ifndef LEAKAUDIT_BINARY_IO_H_
#define LEAKAUDIT_BINARY_IO_H_

#include <bit>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "leakaudit/tensor.h"

namespace leakaudit {

static_assert(std::endian::native == std::endian::little,
              "checkpoints are stored little-endian");

// Payload kinds stored in the checkpoint header. See docs/checkpoint_format.md.
enum class CheckpointKind : uint32_t {
  kFcnModel = 1,
  kCompressedModel = 2,
  kMetaClassifier = 3,
  kSplit = 4,
  kAttackOutcome = 5,
};

inline constexpr std::string_view kCheckpointMagic{"LEAKAUD\0", 8};
inline constexpr uint32_t kCheckpointVersion = 1;

class BinaryWriter {
 public:
  void WriteU8(uint8_t v) { buffer_.push_back(static_cast<char>(v)); }
  void WriteU32(uint32_t v) { Append(&v, sizeof v); }
  void WriteI32(int32_t v) { Append(&v, sizeof v); }
  void WriteU64(uint64_t v) { Append(&v, sizeof v); }
  void WriteF64(double v) { Append(&v, sizeof v); }
  void WriteF64s(std::span<const double> v) {
    Append(v.data(), v.size() * sizeof(double));
  }
  void WriteMatrix(const Matrix& m);  // u32 rows, u32 cols, f64 row-major
  void WriteVector(const Vector& v);  // u32 size, f64 values
  void WriteString(std::string_view s);

  void WriteHeader(CheckpointKind kind);

  const std::string& buffer() const { return buffer_; }
  void Save(const std::filesystem::path& path) const;

 private:
  void Append(const void* data, size_t n) {
    buffer_.append(static_cast<const char*>(data), n);
  }
  std::string buffer_;
};

class BinaryReader {
 public:
  explicit BinaryReader(std::string buffer) : buffer_(std::move(buffer)) {}
  static BinaryReader FromFile(const std::filesystem::path& path);

  uint8_t ReadU8();
  uint32_t ReadU32();
  int32_t ReadI32();
  uint64_t ReadU64();
  double ReadF64();
  Matrix ReadMatrix();
  Vector ReadVector();
  std::string ReadString();

  // Checks magic and version, and that the payload kind matches `expected`.
  void ReadHeader(CheckpointKind expected);
  bool AtEnd() const { return offset_ == buffer_.size(); }

 private:
  void Take(void* out, size_t n);
  std::string buffer_;
  size_t offset_ = 0;
};

}  // namespace leakaudit

#endif  // LEAKAUDIT_BINARY_IO_H_
