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

#ifndef FEDPPCA_TESTS_TEST_UTIL_H_
#define FEDPPCA_TESTS_TEST_UTIL_H_

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fedppca/dataset.h"
#include "fedppca/layout.h"
#include "fedppca/params.h"
#include "fedppca/random.h"

namespace fedppca::testing {

inline ViewLayout MakeLayout(const std::vector<int>& dims) {
  std::vector<ViewSpec> views;
  for (size_t k = 0; k < dims.size(); ++k) {
    views.push_back({"v" + std::to_string(k + 1), dims[k]});
  }
  return ViewLayout(views);
}

// Random parameters honoring the zero-padding rule.
inline LocalParams RandomParams(const ViewLayout& layout, int q, Rng& rng,
                                double sigma2_min = 0.2, double sigma2_max = 1.0) {
  LocalParams p(q, layout.num_views());
  std::uniform_real_distribution<double> unif(sigma2_min, sigma2_max);
  for (int k = 0; k < layout.num_views(); ++k) {
    ViewParams v;
    const int d = layout.dim(k);
    v.mu = SampleStandardNormal(d, rng);
    v.w = Eigen::MatrixXd::Zero(d, q);
    const int a = ActiveColumns(d, q);
    if (a > 0) v.w.leftCols(a) = SampleStandardNormal(d, a, rng);
    v.sigma2 = unif(rng);
    p.views[k] = v;
  }
  return p;
}

inline GlobalParams RandomPrior(const ViewLayout& layout, int q, Rng& rng) {
  GlobalParams g;
  g.latent_dim = q;
  std::uniform_real_distribution<double> unif(0.2, 2.0);
  for (int k = 0; k < layout.num_views(); ++k) {
    GlobalViewParams v;
    const int d = layout.dim(k);
    v.mu_tilde = SampleStandardNormal(d, rng);
    v.w_tilde = Eigen::MatrixXd::Zero(d, q);
    const int a = ActiveColumns(d, q);
    if (a > 0) v.w_tilde.leftCols(a) = SampleStandardNormal(d, a, rng);
    v.sigma2_mu_tilde = unif(rng);
    v.sigma2_w_tilde = unif(rng);
    v.alpha = 2.5 + 3.0 * unif(rng);
    v.beta = unif(rng);
    g.views.push_back(v);
  }
  return g;
}

// Samples n subjects from `params` with every view observed.
inline CenterDataset SampleDataset(const LocalParams& params, const ViewLayout& layout,
                                   int n, Rng& rng) {
  CenterDataset data(layout);
  const int q = params.latent_dim;
  const Eigen::MatrixXd x = SampleStandardNormal(n, q, rng);
  for (int k = 0; k < layout.num_views(); ++k) {
    const ViewParams& v = params.view(k);
    Eigen::MatrixXd block = x * v.w.transpose();
    block.rowwise() += v.mu.transpose();
    block += std::sqrt(v.sigma2) * SampleStandardNormal(n, layout.dim(k), rng);
    data.views[k] = block;
  }
  for (int i = 0; i < n; ++i) {
    data.ids.push_back("s" + std::to_string(i));
    data.groups.push_back(i % 2);
  }
  return data;
}

}  // namespace fedppca::testing

#endif  // FEDPPCA_TESTS_TEST_UTIL_H_
