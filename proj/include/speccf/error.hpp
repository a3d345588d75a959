// Copyright 2026 The speccf Authors. All Rights Reserved.
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

#ifndef SPECCF_ERROR_HPP
#define SPECCF_ERROR_HPP

#include <cstdint>
#include <stdexcept>
#include <string>

namespace speccf {

enum class ErrorKind {
  kInvalidArgument,
  kParse,
  kEmptyInput,
  kDimensionMismatch,
  kRankDeficient,
  kDegenerateComponent,
  kDegenerateTopic,
  kUnknownUser,
  kUnsupportedVersion,
  kMalformedHeader,
  kNonFinite,
  kTruncated,
  kIo,
};

/// Every failure raised by the library. `detail` carries the one integer
/// payload some kinds need: the line number for parse errors, the achieved
/// rank for RankDeficient, the component index for DegenerateComponent.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what, std::int64_t detail = -1)
      : std::runtime_error(what), kind_(kind), detail_(detail) {}

  ErrorKind kind() const noexcept { return kind_; }
  std::int64_t detail() const noexcept { return detail_; }

 private:
  ErrorKind kind_;
  std::int64_t detail_;
};

inline const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::kInvalidArgument: return "InvalidArgument";
    case ErrorKind::kParse: return "Parse";
    case ErrorKind::kEmptyInput: return "EmptyInput";
    case ErrorKind::kDimensionMismatch: return "DimensionMismatch";
    case ErrorKind::kRankDeficient: return "RankDeficient";
    case ErrorKind::kDegenerateComponent: return "DegenerateComponent";
    case ErrorKind::kDegenerateTopic: return "DegenerateTopic";
    case ErrorKind::kUnknownUser: return "UnknownUser";
    case ErrorKind::kUnsupportedVersion: return "UnsupportedVersion";
    case ErrorKind::kMalformedHeader: return "MalformedHeader";
    case ErrorKind::kNonFinite: return "NonFinite";
    case ErrorKind::kTruncated: return "Truncated";
    case ErrorKind::kIo: return "Io";
  }
  return "Unknown";
}

}  // namespace speccf

#endif  // SPECCF_ERROR_HPP
