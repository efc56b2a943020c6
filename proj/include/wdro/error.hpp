// Copyright 2026 The wdro Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace wdro {

enum class ErrorCode {
  kMalformedProblem,
  kNumericalBreakdown,
  kRegionUnbounded,
  kDimensionTooLarge,
  kDimensionMismatch,
  kInvalidArgument,
  kAssumptionViolated,
  kRecourseInfeasible,
  kDualInfeasible,
  kUnsupportedCone,
  kUnsupportedSupport,
  kRequiresL1Norm,
  kRequiresUnboundedSupport,
  kGridTooLarge,
  kParseError,
  kInfeasibleCapacity,
  kUnpairedRecords,
  kIoError,
};

inline std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kMalformedProblem: return "MalformedProblem";
    case ErrorCode::kNumericalBreakdown: return "NumericalBreakdown";
    case ErrorCode::kRegionUnbounded: return "RegionUnbounded";
    case ErrorCode::kDimensionTooLarge: return "DimensionTooLarge";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kAssumptionViolated: return "AssumptionViolated";
    case ErrorCode::kRecourseInfeasible: return "RecourseInfeasible";
    case ErrorCode::kDualInfeasible: return "DualInfeasible";
    case ErrorCode::kUnsupportedCone: return "UnsupportedCone";
    case ErrorCode::kUnsupportedSupport: return "UnsupportedSupport";
    case ErrorCode::kRequiresL1Norm: return "RequiresL1Norm";
    case ErrorCode::kRequiresUnboundedSupport: return "RequiresUnboundedSupport";
    case ErrorCode::kGridTooLarge: return "GridTooLarge";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kInfeasibleCapacity: return "InfeasibleCapacity";
    case ErrorCode::kUnpairedRecords: return "UnpairedRecords";
    case ErrorCode::kIoError: return "IoError";
  }
  return "Unknown";
}

// Every failure in the library surfaces as this exception; `code()` is the
// stable, testable part and `what()` carries the human-readable context.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

inline void require(bool condition, ErrorCode code, const std::string& message) {
  if (!condition) fail(code, message);
}

}  // namespace wdro
