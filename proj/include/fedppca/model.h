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

#ifndef FEDPPCA_MODEL_H_
#define FEDPPCA_MODEL_H_

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "fedppca/dataset.h"
#include "fedppca/layout.h"
#include "fedppca/params.h"
#include "fedppca/random.h"

namespace fedppca {

// Moments of x | t. `precision` is Sigma = I + sum_k W_k^T W_k / sigma_k^2
// over the observed views, `covariance` its inverse.
struct PosteriorMoments {
  Eigen::VectorXd mean;
  Eigen::MatrixXd second_moment;
  Eigen::MatrixXd precision;
  Eigen::MatrixXd covariance;
};

// Posterior for every subject of a dataset. All subjects of a center share
// the same observed views, hence the same covariance.
struct DatasetPosterior {
  Eigen::MatrixXd means;  // N x q
  Eigen::MatrixXd precision;
  Eigen::MatrixXd covariance;

  int size() const { return static_cast<int>(means.rows()); }
  PosteriorMoments moment(int n) const;
};

struct SampledSubject {
  Eigen::VectorXd latent;
  Record record;
};

// Draws x ~ N(0, I_q) and t_k = W_k x + mu_k + eps_k for every layout view.
SampledSubject SampleSubject(const LocalParams& params, const ViewLayout& layout,
                             Rng& rng);

// C_k = W_k W_k^T + sigma_k^2 I.
Eigen::MatrixXd MarginalViewCovariance(const LocalParams& params, int k);

PosteriorMoments LatentPosterior(const LocalParams& params,
                                 const Record& record);
DatasetPosterior LatentPosterior(const LocalParams& params,
                                 const CenterDataset& data);

// Sum over the rows of `data` (N x d_k) of ln N(t; mu_k, C_k).
double ViewMarginalLogLik(const LocalParams& params, int k,
                          const Eigen::MatrixXd& data);
// Per-row terms of ViewMarginalLogLik.
Eigen::VectorXd ViewMarginalLogLikRows(const LocalParams& params, int k,
                                       const Eigen::MatrixXd& data);

// ln N(t_obs; mu_obs, W_obs W_obs^T + Psi_obs) over the observed views of
// one record, i.e. with cross-view covariance included.
double JointMarginalLogLik(const LocalParams& params, const Record& record);
double JointMarginalLogLik(const LocalParams& params,
                           const CenterDataset& data);
Eigen::VectorXd JointMarginalLogLikRows(const LocalParams& params,
                                        const CenterDataset& data);

// Expected complete-data log-likelihood without the 2*pi constants:
//   -sum_n { sum_k [ d_k/2 ln s_k + |t-mu|^2/(2 s_k)
//                    + tr(W^T W <xx^T>)/(2 s_k) - <x>^T W^T (t-mu)/s_k ]
//            + tr(<xx^T>)/2 }
// with k over views observed in `data` and present in `params`.
double ExpectedCompleteLogLik(const LocalParams& params,
                              const CenterDataset& data,
                              std::span<const PosteriorMoments> moments);

// Differential entropy of a Gaussian posterior.
double PosteriorEntropy(const PosteriorMoments& moments);

// ln p(theta_c | theta_tilde) for the views present in `params`; loading
// entries outside the active columns are excluded.
double LogPrior(const LocalParams& params, const GlobalParams& prior);

}  // namespace fedppca

#endif  // FEDPPCA_MODEL_H_
