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

#ifndef FEDPPCA_EXPERIMENT_H_
#define FEDPPCA_EXPERIMENT_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fedppca/data.h"
#include "fedppca/eval.h"
#include "fedppca/federation.h"

namespace fedppca {

enum class WaicData { kTrain, kTest };

struct ExperimentConfig {
  Scenario scenario = Scenario::kIid;
  int centers = 3;
  FederationConfig federation;
  int folds = 3;
  int repeats = 1;
  uint64_t seed = 0;
  bool standardize = true;
  ScaleMode scale_mode = ScaleMode::kPerView;
  bool compute_waic = false;
  WaicData waic_data = WaicData::kTest;
  WaicOptions waic;
  // For views missing at some training center: hide the view in the test
  // fold, impute it and compare with the held-out values.
  bool evaluate_imputation = true;
  bool keep_runs = false;
  int max_workers = 0;
};

struct ViewImputation {
  std::string view;
  double imputed_mae = 0.0;    // view hidden, predicted from the others
  double full_data_mae = 0.0;  // view observed, reconstructed with the rest
};

struct FoldResult {
  int repeat = 0;
  int fold = 0;
  MetricsReport metrics;
  std::vector<ViewImputation> imputations;
  bool ridge_applied = false;
  std::vector<int> test_indices;  // rows of the input held out in this job
  // Kept when ExperimentConfig::keep_runs is set.
  std::optional<FederationResult> run;
  std::optional<Scaler> scaler;
};

// Runs `repeats` x `folds` independent train/test jobs. Each job fits a
// scaler on its training subjects, splits them into centers per scenario,
// federates, and scores the final global parameters.
std::vector<FoldResult> RunExperiment(const CenterDataset& data,
                                      const ExperimentConfig& config);

// MAE pooled over the coordinates of several datasets.
double PooledMae(const GlobalParams& global, std::span<const CenterDataset> data);

}  // namespace fedppca

#endif  // FEDPPCA_EXPERIMENT_H_
