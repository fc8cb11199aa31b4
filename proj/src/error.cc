// Copyright 2026 The fedppca Authors
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

#include "fedppca/error.h"

#include <utility>

namespace fedppca {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid-argument";
    case ErrorCode::kLayoutMismatch: return "layout-mismatch";
    case ErrorCode::kViewParamsMissing: return "view-params-missing";
    case ErrorCode::kNoObservedView: return "no-observed-view";
    case ErrorCode::kSingularPosterior: return "singular-posterior";
    case ErrorCode::kInvalidData: return "invalid-data";
    case ErrorCode::kShapeMismatch: return "shape-mismatch";
    case ErrorCode::kSingularUpdate: return "singular-update";
    case ErrorCode::kInvalidVariance: return "invalid-variance";
    case ErrorCode::kViewUnrepresented: return "view-unrepresented";
    case ErrorCode::kInvalidSensitivity: return "invalid-sensitivity";
    case ErrorCode::kDpDomainError: return "dp-domain-error";
    case ErrorCode::kFormatVersionMismatch: return "format-version-mismatch";
    case ErrorCode::kTruncatedMessage: return "truncated-message";
    case ErrorCode::kChecksumFailure: return "checksum-failure";
    case ErrorCode::kBadMagic: return "bad-magic";
    case ErrorCode::kBadCenterCount: return "bad-center-count";
    case ErrorCode::kInsufficientGroupSamples:
      return "insufficient-group-samples";
    case ErrorCode::kHeaderMismatch: return "header-mismatch";
    case ErrorCode::kRaggedRow: return "ragged-row";
    case ErrorCode::kNonNumericCell: return "non-numeric-cell";
    case ErrorCode::kWaicDegenerate: return "waic-degenerate";
    case ErrorCode::kInvalidDenominator: return "invalid-denominator";
    case ErrorCode::kDegenerateLabels: return "degenerate-labels";
    case ErrorCode::kViewNotMissing: return "view-not-missing";
    case ErrorCode::kClientDropped: return "client-dropped";
    case ErrorCode::kIoError: return "io-error";
  }
  return "unknown";
}

Error::Error(ErrorCode code, const std::string& detail)
    : std::runtime_error(std::string(ErrorCodeName(code)) +
                         (detail.empty() ? "" : ": " + detail)),
      code_(code),
      detail_(detail) {}

DataError::DataError(ErrorCode code, long row, std::string column,
                     const std::string& detail)
    : Error(code, detail), row_(row), column_(std::move(column)) {}

}  // namespace fedppca
