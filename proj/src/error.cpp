// Copyright 2026 The fenn Authors.
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

#include "fenn/error.hpp"

namespace fenn {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNotInRange: return "NotInRange";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kShapeMismatch: return "ShapeMismatch";
    case ErrorCode::kKeyMismatch: return "KeyMismatch";
    case ErrorCode::kDivisorZero: return "DivisorZero";
    case ErrorCode::kOutOfRange: return "OutOfRange";
    case ErrorCode::kUnsupportedFunction: return "UnsupportedFunction";
    case ErrorCode::kMalformedRequest: return "MalformedRequest";
    case ErrorCode::kMalformedInput: return "MalformedInput";
    case ErrorCode::kDomainError: return "DomainError";
    case ErrorCode::kIo: return "IoError";
  }
  return "Unknown";
}

}  // namespace fenn
