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

#include "fedppca/params.h"

#include <cmath>
#include <string>

#include "fedppca/error.h"

namespace fedppca {

int ActiveColumns(int dim, int latent_dim) {
  if (dim > latent_dim) return latent_dim;
  return dim > 1 ? dim - 1 : 0;
}

const ViewParams& LocalParams::view(int k) const {
  if (!has_view(k)) {
    throw Error(ErrorCode::kViewParamsMissing,
                "no parameters for view " + std::to_string(k));
  }
  return *views[k];
}

ViewParams& LocalParams::view(int k) {
  if (!has_view(k)) {
    throw Error(ErrorCode::kViewParamsMissing,
                "no parameters for view " + std::to_string(k));
  }
  return *views[k];
}

std::vector<int> LocalParams::present_views() const {
  std::vector<int> out;
  for (int k = 0; k < num_views(); ++k) {
    if (views[k]) out.push_back(k);
  }
  return out;
}

void LocalParams::Validate(const ViewLayout& layout) const {
  if (num_views() != layout.num_views()) {
    throw Error(ErrorCode::kLayoutMismatch, "view count differs from layout");
  }
  for (int k : present_views()) {
    const ViewParams& v = *views[k];
    const int d = layout.dim(k);
    if (v.mu.size() != d || v.w.rows() != d || v.w.cols() != latent_dim) {
      throw Error(ErrorCode::kShapeMismatch,
                  "parameter shapes for view '" + layout.name(k) + "'");
    }
    if (!(v.sigma2 > 0.0) || !std::isfinite(v.sigma2)) {
      throw Error(ErrorCode::kInvalidVariance,
                  "sigma2 for view '" + layout.name(k) + "'");
    }
    const int active = ActiveColumns(d, latent_dim);
    if (active < latent_dim &&
        !v.w.rightCols(latent_dim - active).isZero(0.0)) {
      throw Error(ErrorCode::kInvalidArgument,
                  "padded loading columns must be zero for view '" +
                      layout.name(k) + "'");
    }
  }
}

LocalParams GlobalParams::PointEstimate() const {
  LocalParams out(latent_dim, num_views());
  for (int k = 0; k < num_views(); ++k) {
    const GlobalViewParams& g = views[k];
    out.views[k] = ViewParams{g.mu_tilde, g.w_tilde, g.noise_mean()};
  }
  return out;
}

void GlobalParams::Validate(const ViewLayout& layout) const {
  if (num_views() != layout.num_views()) {
    throw Error(ErrorCode::kLayoutMismatch, "view count differs from layout");
  }
  for (int k = 0; k < num_views(); ++k) {
    const GlobalViewParams& g = views[k];
    const int d = layout.dim(k);
    if (g.mu_tilde.size() != d || g.w_tilde.rows() != d ||
        g.w_tilde.cols() != latent_dim) {
      throw Error(ErrorCode::kShapeMismatch,
                  "global shapes for view '" + layout.name(k) + "'");
    }
    if (!(g.sigma2_mu_tilde > 0.0) || !(g.sigma2_w_tilde > 0.0) ||
        !(g.alpha > 2.0) || !(g.beta > 0.0)) {
      throw Error(ErrorCode::kInvalidArgument,
                  "global spreads for view '" + layout.name(k) + "'");
    }
  }
}

GlobalParams GlobalParams::SeedPrior(const ViewLayout& layout, int latent_dim) {
  GlobalParams g;
  g.latent_dim = latent_dim;
  for (int k = 0; k < layout.num_views(); ++k) {
    GlobalViewParams v;
    v.mu_tilde = Eigen::VectorXd::Zero(layout.dim(k));
    v.w_tilde = Eigen::MatrixXd::Zero(layout.dim(k), latent_dim);
    v.sigma2_mu_tilde = 1.0;
    v.sigma2_w_tilde = 1.0;
    v.alpha = 3.0;
    v.beta = 2.0;
    g.views.push_back(std::move(v));
  }
  return g;
}

}  // namespace fedppca
