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

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <random>

#include "fedppca/data.h"
#include "fedppca/error.h"
#include "fedppca/random.h"

namespace fedppca {

ViewLayout SyntheticSpec::layout() const {
  std::vector<ViewSpec> specs;
  for (size_t k = 0; k < view_dims.size(); ++k) {
    const std::string name = k < view_names.size()
                                 ? view_names[k]
                                 : "view" + std::to_string(k + 1);
    specs.push_back({name, view_dims[k]});
  }
  return ViewLayout(std::move(specs));
}

void SyntheticSpec::Validate() const {
  if (n_subjects < 1) {
    throw Error(ErrorCode::kInvalidArgument, "n_subjects must be >= 1");
  }
  if (shifted_count < 0 || shifted_count > n_subjects) {
    throw Error(ErrorCode::kInvalidArgument, "shifted_count <= n_subjects violated");
  }
  if (view_dims.empty()) throw Error(ErrorCode::kInvalidArgument, "no views");
  if (!view_names.empty() && view_names.size() != view_dims.size()) {
    throw Error(ErrorCode::kInvalidArgument, "view_names and view_dims differ");
  }
  if (latent_dim < 1 ||
      latent_dim >= *std::min_element(view_dims.begin(), view_dims.end())) {
    throw Error(ErrorCode::kInvalidArgument,
                "latent_dim must be >= 1 and < every view dim");
  }
  if (!(sigma_min > 0.0) || !(sigma_max >= sigma_min) || !(param_std > 0.0) ||
      !(shift_std >= 0.0) || !(shift_norm >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "bad noise, parameter or shift scale");
  }
}

SyntheticData GenerateSynthetic(const SyntheticSpec& spec) {
  spec.Validate();
  const ViewLayout layout = spec.layout();
  const int q = spec.latent_dim;
  const int n = spec.n_subjects;
  Rng rng(spec.seed);
  std::uniform_real_distribution<double> sigma_dist(spec.sigma_min, spec.sigma_max);

  SyntheticData out;
  out.truth = LocalParams(q, layout.num_views());
  for (int k = 0; k < layout.num_views(); ++k) {
    ViewParams v;
    v.w = spec.param_std * SampleStandardNormal(layout.dim(k), q, rng);
    v.mu = spec.param_std * SampleStandardNormal(layout.dim(k), rng);
    const double sigma = sigma_dist(rng);
    v.sigma2 = sigma * sigma;
    out.truth.views[k] = std::move(v);
  }
  out.shift = spec.shift_std * SampleStandardNormal(q, rng);
  if (spec.shift_norm > 0.0) out.shift *= spec.shift_norm / out.shift.norm();

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<int> groups(n, kGroup2);
  for (int i = 0; i < spec.shifted_count; ++i) groups[order[i]] = kGroup1;

  out.latents = SampleStandardNormal(n, q, rng);
  for (int i = 0; i < n; ++i) {
    if (groups[i] == kGroup1) out.latents.row(i) += out.shift.transpose();
  }

  CenterDataset& data = out.dataset;
  data = CenterDataset(layout);
  data.groups = groups;
  for (int i = 0; i < n; ++i) {
    char id[32];
    std::snprintf(id, sizeof(id), "s%04d", i);
    data.ids.emplace_back(id);
  }
  for (int k = 0; k < layout.num_views(); ++k) {
    const ViewParams& v = out.truth.view(k);
    Eigen::MatrixXd block = out.latents * v.w.transpose();
    block.rowwise() += v.mu.transpose();
    block += std::sqrt(v.sigma2) * SampleStandardNormal(n, layout.dim(k), rng);
    data.views[k] = std::move(block);
  }
  return out;
}

}  // namespace fedppca
