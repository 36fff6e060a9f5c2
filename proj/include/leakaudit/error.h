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

#ifndef LEAKAUDIT_ERROR_H_
#define LEAKAUDIT_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace leakaudit {

enum class ErrorCode {
  kShape,
  kInput,
  kTraining,
  kParse,
  kSchema,
  kSize,
  kDegenerateData,
  kConfiguration,
  kOrdering,
  kDependency,
  kValidation,
  kIo,
};

std::string_view ErrorCodeName(ErrorCode code);

// All library failures are reported as Error; the code identifies the
// failure class so callers (and tests) can branch on it.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(ErrorCodeName(code)) + " error: " +
                           message),
        code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

inline std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kShape:
      return "shape";
    case ErrorCode::kInput:
      return "input";
    case ErrorCode::kTraining:
      return "training";
    case ErrorCode::kParse:
      return "parse";
    case ErrorCode::kSchema:
      return "schema";
    case ErrorCode::kSize:
      return "size";
    case ErrorCode::kDegenerateData:
      return "degenerate-data";
    case ErrorCode::kConfiguration:
      return "configuration";
    case ErrorCode::kOrdering:
      return "ordering";
    case ErrorCode::kDependency:
      return "dependency";
    case ErrorCode::kValidation:
      return "validation";
    case ErrorCode::kIo:
      return "io";
  }
  return "unknown";
}

}  // namespace leakaudit

#endif  // LEAKAUDIT_ERROR_H_
