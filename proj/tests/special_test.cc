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

#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/trigamma.hpp>
#include <gtest/gtest.h>

namespace fedppca {
namespace {

class SpecialFunctionTest : public ::testing::TestWithParam<double> {};

TEST_P(SpecialFunctionTest, DigammaMatchesBoost) {
  const double x = GetParam();
  const double expected = boost::math::digamma(x);
  EXPECT_NEAR(Digamma(x), expected, 1e-12 * std::max(1.0, std::abs(expected)));
}

TEST_P(SpecialFunctionTest, TrigammaMatchesBoost) {
  const double x = GetParam();
  const double expected = boost::math::trigamma(x);
  EXPECT_NEAR(Trigamma(x), expected, 1e-12 * std::max(1.0, std::abs(expected)));
}

TEST_P(SpecialFunctionTest, LogMinusDigammaMatchesDifference) {
  const double x = GetParam();
  // The direct difference cancels for large x; use the asymptotic series
  // there instead.
  const double x2 = x * x;
  const double expected =
      x < 100.0 ? std::log(x) - boost::math::digamma(x)
                : 1.0 / (2.0 * x) + 1.0 / (12.0 * x2) - 1.0 / (120.0 * x2 * x2);
  EXPECT_NEAR(LogMinusDigamma(x), expected, 1e-12 * std::abs(expected));
}

INSTANTIATE_TEST_SUITE_P(Grid, SpecialFunctionTest,
                         ::testing::Values(1e-3, 0.1, 0.5, 1.0, 1.5, 2.0 + 1e-6, 3.0,
                                           7.25, 9.999, 10.0, 12.5, 100.0, 1e4, 1e6));

TEST(SpecialFunctionTest, KnownValues) {
  const double euler_gamma = 0.57721566490153286;
  EXPECT_NEAR(Digamma(1.0), -euler_gamma, 1e-13);
  EXPECT_NEAR(Trigamma(1.0), M_PI * M_PI / 6.0, 1e-13);
  // ln x - psi(x) ~ 1/(2x) for large x.
  EXPECT_NEAR(LogMinusDigamma(1e6) * 2e6, 1.0, 1e-6);
}

}  // namespace
}  // namespace fedppca
