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

#include "leakaudit/binary_io.h"

#include <cstring>
#include <fstream>
#include <iterator>

#include "leakaudit/error.h"

namespace leakaudit {

void BinaryWriter::WriteMatrix(const Matrix& m) {
  WriteU32(static_cast<uint32_t>(m.rows()));
  WriteU32(static_cast<uint32_t>(m.cols()));
  WriteF64s(FlatSpan(m));
}

void BinaryWriter::WriteVector(const Vector& v) {
  WriteU32(static_cast<uint32_t>(v.size()));
  WriteF64s({v.data(), static_cast<size_t>(v.size())});
}

void BinaryWriter::WriteString(std::string_view s) {
  WriteU32(static_cast<uint32_t>(s.size()));
  Append(s.data(), s.size());
}

void BinaryWriter::WriteHeader(CheckpointKind kind) {
  Append(kCheckpointMagic.data(), kCheckpointMagic.size());
  WriteU32(kCheckpointVersion);
  WriteU32(static_cast<uint32_t>(kind));
}

void BinaryWriter::Save(const std::filesystem::path& path) const {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  out.write(buffer_.data(), static_cast<std::streamsize>(buffer_.size()));
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path.string());
}

BinaryReader BinaryReader::FromFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::string data((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return BinaryReader(std::move(data));
}

void BinaryReader::Take(void* out, size_t n) {
  if (buffer_.size() - offset_ < n) {
    throw Error(ErrorCode::kParse, "truncated checkpoint");
  }
  std::memcpy(out, buffer_.data() + offset_, n);
  offset_ += n;
}

uint8_t BinaryReader::ReadU8() {
  uint8_t v;
  Take(&v, sizeof v);
  return v;
}
uint32_t BinaryReader::ReadU32() {
  uint32_t v;
  Take(&v, sizeof v);
  return v;
}
int32_t BinaryReader::ReadI32() {
  int32_t v;
  Take(&v, sizeof v);
  return v;
}
uint64_t BinaryReader::ReadU64() {
  uint64_t v;
  Take(&v, sizeof v);
  return v;
}
double BinaryReader::ReadF64() {
  double v;
  Take(&v, sizeof v);
  return v;
}

Matrix BinaryReader::ReadMatrix() {
  const uint32_t rows = ReadU32();
  const uint32_t cols = ReadU32();
  Matrix m(rows, cols);
  Take(m.data(), static_cast<size_t>(rows) * cols * sizeof(double));
  return m;
}

Vector BinaryReader::ReadVector() {
  const uint32_t n = ReadU32();
  Vector v(n);
  Take(v.data(), static_cast<size_t>(n) * sizeof(double));
  return v;
}

std::string BinaryReader::ReadString() {
  const uint32_t n = ReadU32();
  std::string s(n, '\0');
  Take(s.data(), n);
  return s;
}

void BinaryReader::ReadHeader(CheckpointKind expected) {
  char magic[8];
  Take(magic, sizeof magic);
  if (std::string_view(magic, 8) != kCheckpointMagic) {
    throw Error(ErrorCode::kParse, "bad checkpoint magic");
  }
  const uint32_t version = ReadU32();
  if (version != kCheckpointVersion) {
    throw Error(ErrorCode::kParse,
                "unsupported checkpoint version " + std::to_string(version));
  }
  const uint32_t kind = ReadU32();
  if (kind != static_cast<uint32_t>(expected)) {
    throw Error(ErrorCode::kParse,
                "checkpoint holds payload kind " + std::to_string(kind) +
                    ", expected " +
                    std::to_string(static_cast<uint32_t>(expected)));
  }
}

}  // namespace leakaudit
