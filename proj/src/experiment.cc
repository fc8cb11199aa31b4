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

#include "fedppca/experiment.h"

#include "fedppca/error.h"
#include "fedppca/parallel.h"
#include "fedppca/random.h"

namespace fedppca {
namespace {

constexpr uint64_t kSplitTag = 0x53504c54;
constexpr uint64_t kRunTag = 0x52554e;
constexpr uint64_t kWaicTag = 0x57414943;

FoldResult RunFold(const CenterDataset& data, const ExperimentConfig& config,
                   const FoldFamily& family, int repeat, int fold) {
  CenterDataset train = data.Subset(TrainIndices(family, fold));
  CenterDataset test = data.Subset(family[fold]);
  std::optional<Scaler> scaler;
  if (config.standardize) {
    scaler = FitScaler(train, config.scale_mode);
    train = scaler->Apply(train);
    test = scaler->Apply(test);
  }
  const uint64_t job = DeriveSeed(config.seed, {static_cast<uint64_t>(repeat),
                                                static_cast<uint64_t>(fold)});
  const std::vector<CenterDataset> centers = SplitScenario(
      train, config.scenario, config.centers, DeriveSeed(job, {kSplitTag}));
  FederationConfig fed = config.federation;
  fed.seed = DeriveSeed(job, {kRunTag});
  fed.max_workers = 1;  // jobs already run on the experiment pool
  FederationResult run = RunFedMvPpca(fed, centers);

  FoldResult out;
  out.repeat = repeat;
  out.fold = fold;
  out.test_indices = family[fold];
  MetricsReport& m = out.metrics;
  m.round = fed.rounds;
  m.mae_train = PooledMae(run.global, centers);
  m.mae_test = Mae(run.global, test);
  const std::vector<CenterDataset> test_parts = {test};
  const LatentAccuracyResult acc = LatentAccuracy(run.global, centers, test_parts);
  m.accuracy_latent = acc.accuracy;
  out.ridge_applied = acc.ridge_applied;
  if (config.compute_waic) {
    WaicOptions w = config.waic;
    w.seed = DeriveSeed(job, {kWaicTag});
    m.waic = config.waic_data == WaicData::kTest ? Waic(run.global, test, w).waic
                                                 : Waic(run.global, centers, w).waic;
  }
  if (config.evaluate_imputation) {
    for (int k = 0; k < data.layout.num_views(); ++k) {
      bool missing_somewhere = false;
      for (const CenterDataset& c : centers) missing_somewhere |= !c.has_view(k);
      if (!missing_somewhere) continue;
      CenterDataset hidden = test;
      hidden.RemoveView(k);
      const DatasetImputation imp = ImputeDatasetView(run.global, hidden, k);
      ViewImputation vi;
      vi.view = data.layout.name(k);
      vi.imputed_mae = (imp.mean - test.view(k)).cwiseAbs().mean();
      vi.full_data_mae = ViewMae(run.global, test, k);
      m.imputation_mae.emplace_back(vi.view, vi.imputed_mae);
      out.imputations.push_back(vi);
    }
  }
  if (config.keep_runs) {
    out.run = std::move(run);
    out.scaler = std::move(scaler);
  }
  return out;
}

}  // namespace

double PooledMae(const GlobalParams& global, std::span<const CenterDataset> data) {
  double total = 0.0;
  double count = 0.0;
  for (const CenterDataset& d : data) {
    const std::vector<Eigen::MatrixXd> rec = ReconstructDataset(global, d);
    for (int k : d.present_views()) {
      total += (d.view(k) - rec[k]).cwiseAbs().sum();
      count += static_cast<double>(d.view(k).size());
    }
  }
  if (count == 0.0) throw Error(ErrorCode::kInvalidArgument, "no observed values");
  return total / count;
}

std::vector<FoldResult> RunExperiment(const CenterDataset& data,
                                      const ExperimentConfig& config) {
  const std::vector<FoldFamily> families =
      KFold(data, config.folds, config.repeats, config.seed);
  std::vector<FoldResult> results(families.size() * config.folds);
  ParallelFor(
      static_cast<int>(results.size()),
      [&](int job) {
        const int repeat = job / config.folds;
        const int fold = job % config.folds;
        results[job] = RunFold(data, config, families[repeat], repeat, fold);
      },
      config.max_workers);
  return results;
}

}  // namespace fedppca
