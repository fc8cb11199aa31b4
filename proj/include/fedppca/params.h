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

#ifndef FEDPPCA_PARAMS_H_
#define FEDPPCA_PARAMS_H_

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "fedppca/layout.h"

namespace fedppca {

// Number of loading columns that carry signal for a view of dimension `dim`
// under latent dimension `q`. When dim <= q only the first dim-1 columns are
// free; the remaining ones are held at zero.
int ActiveColumns(int dim, int latent_dim);

// Per-view local parameters: offset, loadings and isotropic noise variance.
struct ViewParams {
  Eigen::VectorXd mu;
  Eigen::MatrixXd w;
  double sigma2 = 1.0;
};

// A center's parameter set. Views absent from the center stay empty.
struct LocalParams {
  int latent_dim = 0;
  std::vector<std::optional<ViewParams>> views;

  LocalParams() = default;
  LocalParams(int q, int num_views) : latent_dim(q), views(num_views) {}

  int num_views() const { return static_cast<int>(views.size()); }
  bool has_view(int k) const {
    return k >= 0 && k < num_views() && views[k].has_value();
  }
  // Throws kViewParamsMissing.
  const ViewParams& view(int k) const;
  ViewParams& view(int k);
  std::vector<int> present_views() const;

  // Checks shapes against the layout, sigma2 > 0 and zero padding.
  void Validate(const ViewLayout& layout) const;
};

// Master-level distribution of one view's local parameters:
//   mu_c ~ N(mu_tilde, sigma2_mu_tilde I)
//   W_c  ~ MN(w_tilde, I, sigma2_w_tilde I)
//   sigma2_c ~ InverseGamma(alpha, beta)
struct GlobalViewParams {
  Eigen::VectorXd mu_tilde;
  double sigma2_mu_tilde = 1.0;
  Eigen::MatrixXd w_tilde;
  double sigma2_w_tilde = 1.0;
  double alpha = 3.0;
  double beta = 2.0;

  double noise_mean() const { return beta / (alpha - 1.0); }
  // Variance of the inverse-gamma prior; finite for alpha > 2.
  double noise_variance() const {
    return beta * beta / ((alpha - 1.0) * (alpha - 1.0) * (alpha - 2.0));
  }
};

struct GlobalParams {
  int latent_dim = 0;
  std::vector<GlobalViewParams> views;

  int num_views() const { return static_cast<int>(views.size()); }

  // mu = mu_tilde, W = w_tilde, sigma2 = beta / (alpha - 1) for every view.
  LocalParams PointEstimate() const;

  void Validate(const ViewLayout& layout) const;

  // Zero means, unit spreads and an inverse-gamma prior with unit mean and
  // unit variance (alpha = 3, beta = 2).
  static GlobalParams SeedPrior(const ViewLayout& layout, int latent_dim);
};

}  // namespace fedppca

#endif  // FEDPPCA_PARAMS_H_
