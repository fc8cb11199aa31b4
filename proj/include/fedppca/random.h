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

#ifndef FEDPPCA_RANDOM_H_
#define FEDPPCA_RANDOM_H_

#include <cstdint>
#include <initializer_list>
#include <random>

#include <Eigen/Dense>

namespace fedppca {

using Rng = std::mt19937_64;

// Derives an independent stream seed from a base seed and a tuple of tags
// (center, round, view, ...). Uses the splitmix64 finalizer so nearby tags
// give unrelated streams.
uint64_t DeriveSeed(uint64_t base, std::initializer_list<uint64_t> tags);

Eigen::VectorXd SampleStandardNormal(int n, Rng& rng);
// Filled row by row.
Eigen::MatrixXd SampleStandardNormal(int rows, int cols, Rng& rng);

// InverseGamma(shape alpha, scale beta) as 1 / Gamma(alpha, rate beta).
double SampleInverseGamma(double alpha, double beta, Rng& rng);

// Laplace(0, scale).
double SampleLaplace(double scale, Rng& rng);

}  // namespace fedppca

#endif  // FEDPPCA_RANDOM_H_
