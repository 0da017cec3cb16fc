// Copyright 2026 The randcnn Authors. All Rights Reserved.
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

#include "randcnn/error.hpp"

namespace randcnn {

const char* error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kOk: return "ok";
    case ErrorCode::kInvalidArgument: return "invalid argument";
    case ErrorCode::kShapeMismatch: return "shape mismatch";
    case ErrorCode::kIo: return "i/o error";
    case ErrorCode::kUnsupportedFormat: return "unsupported format";
    case ErrorCode::kNotAWeightFile: return "not a weight file";
    case ErrorCode::kVersionMismatch: return "version mismatch";
    case ErrorCode::kTruncatedFile: return "truncated file";
    case ErrorCode::kUnknownLayer: return "unknown layer";
    case ErrorCode::kUnnormalizableLayer: return "unnormalizable layer";
    case ErrorCode::kNonFinite: return "non-finite value";
    case ErrorCode::kLineSearchFailed: return "line search failed";
    case ErrorCode::kThresholdBreached: return "threshold breached";
    case ErrorCode::kInternal: return "internal error";
  }
  return "unknown error";
}

}  // namespace randcnn
