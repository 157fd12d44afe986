// Copyright 2026 The Retarget Authors. All Rights Reserved.
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

namespace retarget {

enum class ErrorCode {
  kInvalidArgument,
  kFileNotFound,
  kDecodeError,
  kIoError,
  kZeroDimension,
  kDimensionMismatch,
  kProviderFailure,
  kDegenerateTarget,
  kInvalidSeam,
  kDegenerateMesh,
  kFoldover,
  kNonConvergence,
  kFrameDimensionMismatch,
  kCoverageError,
  kKindMismatch,
};

inline const char* ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kFileNotFound: return "FileNotFound";
    case ErrorCode::kDecodeError: return "DecodeError";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kZeroDimension: return "ZeroDimension";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kProviderFailure: return "ProviderFailure";
    case ErrorCode::kDegenerateTarget: return "DegenerateTarget";
    case ErrorCode::kInvalidSeam: return "InvalidSeam";
    case ErrorCode::kDegenerateMesh: return "DegenerateMesh";
    case ErrorCode::kFoldover: return "Foldover";
    case ErrorCode::kNonConvergence: return "NonConvergence";
    case ErrorCode::kFrameDimensionMismatch: return "FrameDimensionMismatch";
    case ErrorCode::kCoverageError: return "CoverageError";
    case ErrorCode::kKindMismatch: return "KindMismatch";
  }
  return "Unknown";
}

// Every failure raised by the library carries one of the codes above so
// callers (the CLI in particular) can map it onto an exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace retarget
