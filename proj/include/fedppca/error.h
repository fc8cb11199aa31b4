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

#ifndef FEDPPCA_ERROR_H_
#define FEDPPCA_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace fedppca {

// Every failure raised by the library carries one of these codes. The
// kebab-case names returned by ErrorCodeName() are a stable contract used by
// the CLI and in test assertions.
enum class ErrorCode {
  kInvalidArgument,
  kLayoutMismatch,
  kViewParamsMissing,
  kNoObservedView,
  kSingularPosterior,
  kInvalidData,
  kShapeMismatch,
  kSingularUpdate,
  kInvalidVariance,
  kViewUnrepresented,
  kInvalidSensitivity,
  kDpDomainError,
  kFormatVersionMismatch,
  kTruncatedMessage,
  kChecksumFailure,
  kBadMagic,
  kBadCenterCount,
  kInsufficientGroupSamples,
  kHeaderMismatch,
  kRaggedRow,
  kNonNumericCell,
  kWaicDegenerate,
  kInvalidDenominator,
  kDegenerateLabels,
  kViewNotMissing,
  kClientDropped,
  kIoError,
};

std::string_view ErrorCodeName(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail);

  ErrorCode code() const { return code_; }
  std::string_view name() const { return ErrorCodeName(code_); }
  // The message without the leading code name.
  const std::string& detail() const { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

// Data errors for tabular input carry the offending cell. `row` is the
// zero-based data row (header excluded); -1 when the error is not tied to a
// row.
class DataError : public Error {
 public:
  DataError(ErrorCode code, long row, std::string column,
            const std::string& detail);

  long row() const { return row_; }
  const std::string& column() const { return column_; }

 private:
  long row_;
  std::string column_;
};

}  // namespace fedppca

#endif  // FEDPPCA_ERROR_H_
