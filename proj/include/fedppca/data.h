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

#ifndef FEDPPCA_DATA_H_
#define FEDPPCA_DATA_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fedppca/dataset.h"
#include "fedppca/layout.h"
#include "fedppca/params.h"

namespace fedppca {

// Synthetic multi-view data: one random parameter set, latents N(0, I_q),
// and a fixed random shift applied to `shifted_count` subjects (group g1).
struct SyntheticSpec {
  int n_subjects = 400;
  std::vector<int> view_dims = {15, 8, 10};
  // Defaults to view1, view2, ... when empty.
  std::vector<std::string> view_names;
  int latent_dim = 5;
  int shifted_count = 250;
  uint64_t seed = 0;
  double param_std = 1.0;  // entries of W and mu
  double sigma_min = 0.2;  // noise standard deviation range
  double sigma_max = 0.3;
  double shift_std = 2.0;  // the shift is drawn from N(0, shift_std^2 I)
  // When positive, the drawn shift is rescaled to this Euclidean norm.
  double shift_norm = 10.0;

  ViewLayout layout() const;
  void Validate() const;
};

struct SyntheticData {
  CenterDataset dataset;
  LocalParams truth;
  Eigen::MatrixXd latents;  // N x q, shift included
  Eigen::VectorXd shift;
};

SyntheticData GenerateSynthetic(const SyntheticSpec& spec);

enum class Scenario { kIid, kG, kK, kGK };
std::string ScenarioName(Scenario scenario);
Scenario ParseScenario(const std::string& name);

// Distributes subjects over `num_centers` centers.
//   IID: groups shuffled and dealt round-robin, continuing across groups.
//   G:   each group is halved; one half is dealt over the first third of the
//        centers (mixed), the other over the g1-only (second third) or g2-only
//        (last third) centers.
//   K:   IID, then view 1 is removed in the second third of the centers and
//        view 2 in the last third.
//   GK:  G followed by the K view removal.
// Subjects keep their input order within a center.
std::vector<CenterDataset> SplitScenario(const CenterDataset& data,
                                         Scenario scenario, int num_centers,
                                         uint64_t seed);

// CSV with columns id, group (optional) and `view.feature` (grouped by view).
// When `expected` is given, the header must use its views and dims; views
// whose columns are all absent are treated as missing.
CenterDataset LoadTabular(const std::string& path,
                          const ViewLayout* expected = nullptr);
CenterDataset ParseTabular(const std::string& text,
                           const ViewLayout* expected = nullptr);
std::string FormatTabular(const CenterDataset& data);
void WriteTabular(const std::string& path, const CenterDataset& data);

enum class ScaleMode {
  kPerFeature,  // every feature gets unit population variance
  kPerView,     // one scale per view: the root mean feature variance, which
                // keeps within-view noise isotropic
};

// Per-feature centering with population standard deviations.
struct Scaler {
  std::vector<Eigen::VectorXd> mean;   // per view; empty when unseen
  std::vector<Eigen::VectorXd> scale;  // 1 for zero-variance features
  std::vector<std::vector<bool>> zero_variance;

  CenterDataset Apply(const CenterDataset& data) const;
  // Maps standardized values of view k back to the original units.
  Eigen::MatrixXd Invert(int k, const Eigen::MatrixXd& block) const;
};

Scaler FitScaler(std::span<const CenterDataset> train,
                 ScaleMode mode = ScaleMode::kPerFeature);
Scaler FitScaler(const CenterDataset& train,
                 ScaleMode mode = ScaleMode::kPerFeature);

// Stratified folds: [repeat][fold] -> sorted subject indices. Within every
// repeat each group is shuffled and dealt round-robin, continuing across
// groups, so fold sizes differ by at most one.
using FoldFamily = std::vector<std::vector<int>>;
std::vector<FoldFamily> KFold(const CenterDataset& data, int k, int repeats,
                              uint64_t seed);
// Complement of fold `f` within a family.
std::vector<int> TrainIndices(const FoldFamily& family, int f);

}  // namespace fedppca

#endif  // FEDPPCA_DATA_H_
