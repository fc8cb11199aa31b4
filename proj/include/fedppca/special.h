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

#ifndef FEDPPCA_SPECIAL_H_
#define FEDPPCA_SPECIAL_H_

namespace fedppca {

// Digamma and trigamma for x > 0 via upward recurrence to x >= 10 and the
// asymptotic series; accurate to ~1e-13 relative.
double Digamma(double x);
double Trigamma(double x);

// ln(x) - digamma(x) without cancellation for large x.
double LogMinusDigamma(double x);

}  // namespace fedppca

#endif  // FEDPPCA_SPECIAL_H_
