// Copyright 2026 The CPatchBLS Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef CPATCHBLS_ERROR_HPP
#define CPATCHBLS_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace cpatchbls {

enum class ErrorKind {
  MissingFile,
  RaggedRows,
  NonFiniteValue,
  InvalidLabel,
  ShapeMismatch,
  LengthMismatch,
  UnknownKey,
  InvariantViolation,
  PatchTooLarge,
  NumericalFailure,
  SingularSystem,
  DegenerateLabels,
  ScoreMismatch,
  IoFailure,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::MissingFile: return "MissingFile";
    case ErrorKind::RaggedRows: return "RaggedRows";
    case ErrorKind::NonFiniteValue: return "NonFiniteValue";
    case ErrorKind::InvalidLabel: return "InvalidLabel";
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::UnknownKey: return "UnknownKey";
    case ErrorKind::InvariantViolation: return "InvariantViolation";
    case ErrorKind::PatchTooLarge: return "PatchTooLarge";
    case ErrorKind::NumericalFailure: return "NumericalFailure";
    case ErrorKind::SingularSystem: return "SingularSystem";
    case ErrorKind::DegenerateLabels: return "DegenerateLabels";
    case ErrorKind::ScoreMismatch: return "ScoreMismatch";
    case ErrorKind::IoFailure: return "IoFailure";
  }
  return "Unknown";
}

/// The single exception type thrown by the library. `kind()` is stable and
/// machine-readable; `what()` is "<Kind>: <detail>".
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& detail)
      : std::runtime_error(std::string(to_string(kind)) + ": " + detail),
        kind_(kind),
        detail_(detail) {}

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorKind kind_;
  std::string detail_;
};

}  // namespace cpatchbls

#endif  // CPATCHBLS_ERROR_HPP
