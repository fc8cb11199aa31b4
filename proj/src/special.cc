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

#include "fedppca/special.h"

#include <cmath>

namespace fedppca {
namespace {

constexpr double kShift = 10.0;

// ln(x) - digamma(x) for x >= kShift:
//   1/(2x) + 1/(12x^2) - 1/(120x^4) + 1/(252x^6) - 1/(240x^8) + 1/(132x^10)
double AsymptoticLogMinusDigamma(double x) {
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  const double series =
      inv2 * (1.0 / 12.0 -
              inv2 * (1.0 / 120.0 -
                      inv2 * (1.0 / 252.0 -
                              inv2 * (1.0 / 240.0 - inv2 * (1.0 / 132.0)))));
  return 0.5 * inv + series;
}

}  // namespace

double LogMinusDigamma(double x) {
  // psi(x) = psi(x + m) - sum_{i<m} 1/(x + i)
  double correction = 0.0;
  double y = x;
  while (y < kShift) {
    correction += 1.0 / y;
    y += 1.0;
  }
  //   ln x - psi(x) = [ln x - ln y] + [ln y - psi(y)] + correction
  return std::log(x / y) + AsymptoticLogMinusDigamma(y) + correction;
}

double Digamma(double x) { return std::log(x) - LogMinusDigamma(x); }

double Trigamma(double x) {
  double acc = 0.0;
  while (x < kShift) {
    acc += 1.0 / (x * x);
    x += 1.0;
  }
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  // 1/x + 1/(2x^2) + 1/(6x^3) - 1/(30x^5) + 1/(42x^7) - 1/(30x^9) + 5/(66x^11)
  const double series =
      inv * (1.0 + inv * (0.5 +
                          inv * (1.0 / 6.0 -
                                 inv2 * (1.0 / 30.0 -
                                         inv2 * (1.0 / 42.0 -
                                                 inv2 * (1.0 / 30.0 -
                                                         inv2 * 5.0 / 66.0))))));
  return acc + series;
}

}  // namespace fedppca
