// Copyright 2026 The LaneForge Authors. All Rights Reserved.
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

namespace laneforge {

enum class ErrorCode {
  kInvalidArgument,
  kDegenerateAnchor,
  kTooFewPoints,
  kOutOfGrid,
  kShapeMismatch,
  kNoOverlapSlices,
  kNonFinite,
  kEmptyProposals,
  kEmptyLane,
  kOddTokenCount,
  kNonNumericToken,
  kMalformedJson,
  kMissingKey,
  kTypeMismatch,
  kLengthMismatch,
  kUnsupportedFormat,
  kIo,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kDegenerateAnchor: return "DegenerateAnchor";
    case ErrorCode::kTooFewPoints: return "TooFewPoints";
    case ErrorCode::kOutOfGrid: return "OutOfGrid";
    case ErrorCode::kShapeMismatch: return "ShapeMismatch";
    case ErrorCode::kNoOverlapSlices: return "NoOverlapSlices";
    case ErrorCode::kNonFinite: return "NonFinite";
    case ErrorCode::kEmptyProposals: return "EmptyProposals";
    case ErrorCode::kEmptyLane: return "EmptyLane";
    case ErrorCode::kOddTokenCount: return "OddTokenCount";
    case ErrorCode::kNonNumericToken: return "NonNumericToken";
    case ErrorCode::kMalformedJson: return "MalformedJson";
    case ErrorCode::kMissingKey: return "MissingKey";
    case ErrorCode::kTypeMismatch: return "TypeMismatch";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kUnsupportedFormat: return "UnsupportedFormat";
    case ErrorCode::kIo: return "Io";
  }
  return "Unknown";
}

/// Every failure raised by the library. Parser errors carry a 1-based
/// line and column (0 when not applicable).
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, int line = 0,
        int column = 0)
      : std::runtime_error(format(code, message, line, column)),
        code_(code),
        line_(line),
        column_(column) {}

  ErrorCode code() const noexcept { return code_; }
  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

 private:
  static std::string format(ErrorCode code, const std::string& message,
                            int line, int column) {
    std::string out(to_string(code));
    if (line > 0) {
      out += " at line " + std::to_string(line);
      if (column > 0) out += ", column " + std::to_string(column);
    }
    if (!message.empty()) out += ": " + message;
    return out;
  }

  ErrorCode code_;
  int line_;
  int column_;
};

}  // namespace laneforge
