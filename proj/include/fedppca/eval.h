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

#ifndef FEDPPCA_EVAL_H_
#define FEDPPCA_EVAL_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fedppca/dataset.h"
#include "fedppca/params.h"
#include "fedppca/random.h"

namespace fedppca {

// Posterior latent mean from the observed views under the global point
// estimate, decoded into every layout view as W_tilde <x> + mu_tilde.
std::vector<Eigen::VectorXd> Reconstruct(const GlobalParams& global,
                                         const Record& record);
// Batched form: one N x d_k block per layout view.
std::vector<Eigen::MatrixXd> ReconstructDataset(const GlobalParams& global,
                                                const CenterDataset& data);
// Stochastic variant: parameters drawn from the global distributions and the
// latent drawn from its posterior under them.
std::vector<Eigen::VectorXd> ReconstructSampled(const GlobalParams& global,
                                                const Record& record, Rng& rng);

// Mean of |t - t_hat| over subjects and observed coordinates.
double Mae(const GlobalParams& global, const CenterDataset& data);
// Same, restricted to the coordinates of view k.
double ViewMae(const GlobalParams& global, const CenterDataset& data, int k);

enum class WaicLikelihood {
  kViewSum,  // sum over observed views of the per-view marginals
  kJoint,    // joint marginal over the concatenated observed views
};

struct WaicOptions {
  int samples = 1000;
  uint64_t seed = 0;
  WaicLikelihood likelihood = WaicLikelihood::kViewSum;
};

struct WaicResult {
  double waic = 0.0;
  double lppd = 0.0;
  double p_waic = 0.0;
};

// WAIC = -2 (lppd - p_waic) with parameter sets drawn from the global
// distributions: lppd = sum_n ln mean_s p(t_n | theta_s) and p_waic =
// sum_n var_s ln p(t_n | theta_s) (sample variance).
WaicResult Waic(const GlobalParams& global, const CenterDataset& data,
                const WaicOptions& options = {});
WaicResult Waic(const GlobalParams& global, std::span<const CenterDataset> data,
                const WaicOptions& options = {});

// (mean(a) - mean(b)) / sqrt(var(a)/N_a - var(b)/N_b), sample variances.
// Raises kInvalidDenominator when the radicand is not positive.
double WaicStdDiff(std::span<const double> waic_q,
                   std::span<const double> waic_q_minus_1);

// Two-class linear discriminant with a pooled maximum-likelihood covariance
// and class-frequency priors.
class Lda {
 public:
  // Raises kDegenerateLabels unless both labels occur.
  static Lda Fit(const Eigen::MatrixXd& x, std::span<const int> labels);

  int Predict(const Eigen::VectorXd& x) const;
  std::vector<int> Predict(const Eigen::MatrixXd& x) const;
  bool ridge_applied() const { return ridge_applied_; }
  const Eigen::VectorXd& direction() const { return direction_; }

 private:
  Eigen::VectorXd direction_;  // points from g1 towards g2
  double offset_ = 0.0;
  bool ridge_applied_ = false;
};

// N x q posterior latent means under the global point estimate.
Eigen::MatrixXd ProjectLatent(const GlobalParams& global, const CenterDataset& data);

struct LatentAccuracyResult {
  double accuracy = 0.0;
  bool ridge_applied = false;
};

// LDA fitted on the pooled training projections, scored on the test ones.
LatentAccuracyResult LatentAccuracy(const GlobalParams& global,
                                    std::span<const CenterDataset> train,
                                    std::span<const CenterDataset> test);
double Accuracy(std::span<const int> predicted, std::span<const int> labels);

struct Imputation {
  Eigen::VectorXd mean;
  Eigen::VectorXd stddev;
};

// Predictive distribution of view k given the observed views of a record.
// Raises kViewNotMissing when view k is observed.
Imputation ImputeView(const GlobalParams& global, const Record& record, int k);

// Per-dataset imputation of a view absent from `data`: mean and stddev are
// N x d_k.
struct DatasetImputation {
  Eigen::MatrixXd mean;
  Eigen::MatrixXd stddev;
};
DatasetImputation ImputeDatasetView(const GlobalParams& global,
                                    const CenterDataset& data, int k);

struct MetricsReport {
  int round = 0;
  double mae_train = 0.0;
  double mae_test = 0.0;
  double accuracy_latent = 0.0;
  std::optional<double> waic;
  // name -> MAE of the imputed view against held-out values.
  std::vector<std::pair<std::string, double>> imputation_mae;
};

// Long-format rows: metric, scenario, centers, method, value.
struct LongRow {
  std::string metric;
  std::string scenario;
  int centers = 0;
  std::string method;
  double value = 0.0;
};
std::vector<LongRow> ToLongRows(const MetricsReport& report,
                                const std::string& scenario, int centers,
                                const std::string& method);
std::string FormatLongRows(std::span<const LongRow> rows);

// Two-sided Welch t-test p-value.
double WelchTTestPValue(std::span<const double> a, std::span<const double> b);

double Mean(std::span<const double> values);
// Unbiased sample variance; 0 for fewer than two values.
double SampleVariance(std::span<const double> values);

}  // namespace fedppca

#endif  // FEDPPCA_EVAL_H_
