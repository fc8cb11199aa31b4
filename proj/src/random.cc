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

#include "fedppca/random.h"

#include <cmath>

namespace fedppca {
namespace {

uint64_t SplitMix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

uint64_t DeriveSeed(uint64_t base, std::initializer_list<uint64_t> tags) {
  uint64_t s = SplitMix64(base);
  for (uint64_t t : tags) s = SplitMix64(s ^ SplitMix64(t + 0x632be59bd9b4e019ULL));
  return s;
}

Eigen::VectorXd SampleStandardNormal(int n, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v(i) = normal(rng);
  return v;
}

Eigen::MatrixXd SampleStandardNormal(int rows, int cols, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) m(i, j) = normal(rng);
  }
  return m;
}

double SampleInverseGamma(double alpha, double beta, Rng& rng) {
  std::gamma_distribution<double> gamma(alpha, 1.0 / beta);
  return 1.0 / gamma(rng);
}

double SampleLaplace(double scale, Rng& rng) {
  // Difference of two iid exponentials.
  std::exponential_distribution<double> expo(1.0);
  return scale * (expo(rng) - expo(rng));
}

}  // namespace fedppca
