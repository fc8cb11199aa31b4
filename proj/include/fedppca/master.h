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

#ifndef FEDPPCA_MASTER_H_
#define FEDPPCA_MASTER_H_

#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "fedppca/layout.h"
#include "fedppca/params.h"

namespace fedppca {

struct CenterContribution {
  std::string center_id;
  LocalParams params;
};

struct MasterOptions {
  // Lower bound applied to sigma2_mu_tilde and sigma2_w_tilde.
  double spread_floor = 1e-8;
};

struct MeanSpread {
  Eigen::VectorXd mean;
  double spread = 0.0;
};
struct LoadingSpread {
  Eigen::MatrixXd mean;
  double spread = 0.0;
};

// mu_tilde = mean of mu_c over the centers holding view k;
// sigma2_mu_tilde = sum_c |mu_c - mu_tilde|^2 / (C_k d_k). Unfloored.
MeanSpread AggregateMu(std::span<const CenterContribution> inputs, int k);
// Same for W with the Frobenius norm and C_k d_k q in the denominator.
LoadingSpread AggregateW(std::span<const CenterContribution> inputs, int k);

inline constexpr double kMinAlpha = 2.0 + 1e-6;
inline constexpr double kMaxAlpha = 1e6;

struct InverseGammaFit {
  double alpha = 0.0;
  double beta = 0.0;
  // All values (numerically) identical, or a single value: alpha pinned at
  // kMaxAlpha and beta matched to the sample mean.
  bool degenerate = false;
  int iterations = 0;
};

// Maximum-likelihood InverseGamma(alpha, beta) fit. beta is profiled out as
// beta(alpha) = n alpha / sum(1/x); alpha solves ln(alpha) - psi(alpha) =
// ln(mean(1/x)) - mean(ln(1/x)) by safeguarded Newton from the moment-matched
// start alpha0 = m^2/v + 2.
InverseGammaFit FitInverseGamma(std::span<const double> values);

// alpha0 = m^2 / v + 2 and beta0 = m (alpha0 - 1).
std::pair<double, double> InverseGammaMomentMatch(double mean, double variance);

struct AggregationDiagnostics {
  int spread_floor_hits = 0;
  std::vector<bool> degenerate_noise;  // per view
  std::vector<int> contributors;       // per view
};

// Full master step: mean/spread per view plus the inverse-gamma noise prior.
// Raises kViewUnrepresented naming the first view nobody holds.
GlobalParams AggregateRound(std::span<const CenterContribution> inputs,
                            const ViewLayout& layout, int latent_dim,
                            const MasterOptions& options = {},
                            AggregationDiagnostics* diagnostics = nullptr);

}  // namespace fedppca

#endif  // FEDPPCA_MASTER_H_
