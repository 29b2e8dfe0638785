// Copyright 2026 The ffgen Authors
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

#include "ffgen/common.h"

namespace ffgen {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid-argument";
    case ErrorCode::kOutOfRange: return "out-of-range";
    case ErrorCode::kDegenerateThrust: return "degenerate-thrust";
    case ErrorCode::kDegenerateAttitude: return "degenerate-attitude";
    case ErrorCode::kNoConvergence: return "no-convergence";
    case ErrorCode::kSingularJacobian: return "singular-jacobian";
    case ErrorCode::kSingularSystem: return "singular-system";
    case ErrorCode::kInvalidLog: return "invalid-log";
    case ErrorCode::kParse: return "parse-error";
    case ErrorCode::kIo: return "io-error";
  }
  return "unknown";
}

}  // namespace ffgen
