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

#ifndef FEDPPCA_DP_H_
#define FEDPPCA_DP_H_

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <boost/multiprecision/cpp_int.hpp>

#include "fedppca/layout.h"
#include "fedppca/params.h"
#include "fedppca/random.h"

namespace fedppca {

using Rational = boost::multiprecision::cpp_rational;

enum class GaussianVariant { kImproved, kClassic };
std::string GaussianVariantName(GaussianVariant variant);
GaussianVariant ParseGaussianVariant(const std::string& name);

// The three shared quantities of a view, in the order they are privatized.
enum class SharedParameter { kMu = 0, kW = 1, kSigma2 = 2 };
std::string SharedParameterName(SharedParameter parameter);

struct ParameterBudget {
  double epsilon = 0.0;
  double delta = 0.0;
};

struct PrivacySpec {
  double epsilon = 10.0;
  double delta = 0.01;
  // Clipping bound g = clip_multiplier * prior standard deviation.
  double clip_multiplier = 1.0;
  int norm_order = 2;
  GaussianVariant variant = GaussianVariant::kImproved;
  // Optional per-parameter overrides of (epsilon, delta). Entries with a
  // non-positive epsilon fall back to the shared values above.
  ParameterBudget mu_budget;
  ParameterBudget w_budget;
  ParameterBudget sigma2_budget;

  // Budget spent by one release of `parameter`. The Laplace release of
  // sigma2 is pure epsilon-DP, so its delta is always 0.
  ParameterBudget BudgetFor(SharedParameter parameter) const;

  // Raises kDpDomainError on an out-of-domain budget and kInvalidArgument on
  // a bad clip multiplier or norm order.
  void Validate() const;
};

double LaplaceScale(double sensitivity_l1, double epsilon);
// (c + sqrt(c^2 + eps)) * sensitivity / (eps sqrt 2),
// c = sqrt(ln(2 / (sqrt(16 delta + 1) - 1))). Needs 0 < delta < 0.5.
double ImprovedGaussianStd(double sensitivity_l2, double epsilon, double delta);
// sqrt(2 ln(1.25 / delta)) * sensitivity / eps. Needs eps < 1.
double ClassicGaussianStd(double sensitivity_l2, double epsilon, double delta);
double GaussianStd(double sensitivity_l2, double epsilon, double delta,
                   GaussianVariant variant);

Eigen::VectorXd LaplaceMechanism(const Eigen::VectorXd& value,
                                 double sensitivity_l1, double epsilon,
                                 Rng& rng);
Eigen::VectorXd GaussianMechanism(const Eigen::VectorXd& value,
                                  double sensitivity_l2, double epsilon,
                                  double delta, GaussianVariant variant,
                                  Rng& rng);
// Adds MN(0, I, s^2 I) noise: iid N(0, s^2) per entry, drawn in row-major
// order so that it matches GaussianMechanism on the row-major flattening.
Eigen::MatrixXd MatrixNormalMechanism(const Eigen::MatrixXd& value,
                                      double sensitivity_l2, double epsilon,
                                      double delta, GaussianVariant variant,
                                      Rng& rng);

// l_p norm of the flattened entries, p in {1, 2}.
double EntryNorm(const Eigen::MatrixXd& value, int norm_order);
// value / max(1, |value|_p / bound). Values within the bound are returned
// unchanged.
Eigen::MatrixXd ClipDifference(const Eigen::MatrixXd& value, double bound,
                               int norm_order);
Eigen::VectorXd ClipDifference(const Eigen::VectorXd& value, double bound,
                               int norm_order);

struct LedgerEntry {
  std::string center_id;
  int round = 0;
  int view = 0;
  SharedParameter parameter = SharedParameter::kMu;
  std::string mechanism;
  double epsilon = 0.0;
  double delta = 0.0;
};

struct BudgetTotals {
  Rational epsilon = 0;
  Rational delta = 0;

  double epsilon_value() const { return epsilon.convert_to<double>(); }
  double delta_value() const { return delta.convert_to<double>(); }
  bool operator==(const BudgetTotals&) const = default;
};

// Append-only record of every release. Totals are exact sums, since every
// double is a dyadic rational.
class PrivacyLedger {
 public:
  void Append(const LedgerEntry& entry);
  void Merge(const PrivacyLedger& other);

  const std::vector<LedgerEntry>& entries() const { return entries_; }
  std::vector<std::string> centers() const;
  BudgetTotals Totals(const std::string& center_id) const;
  BudgetTotals RoundTotals(const std::string& center_id, int round) const;

  // One line per (center, round) with the round and cumulative budgets.
  std::string Report() const;

 private:
  std::vector<LedgerEntry> entries_;
};

// (3 K eps, 2 K delta).
std::pair<double, double> RoundBudget(int num_views, double epsilon,
                                      double delta);
// Exact total of one round in which every one of `num_views` views releases
// all three parameters under `spec`.
BudgetTotals RoundBudget(int num_views, const PrivacySpec& spec);
// Component-wise maximum over centers.
std::pair<double, double> GlobalParamBudget(
    const std::vector<std::pair<double, double>>& per_center);

struct ClipRecord {
  int view = 0;
  SharedParameter parameter = SharedParameter::kMu;
  double norm = 0.0;          // before clipping
  double clipped_norm = 0.0;  // after clipping
  double bound = 0.0;         // g
  bool clipped = false;
};

struct NoiseStream {
  uint64_t seed = 0;
  uint64_t center = 0;
  uint64_t round = 0;
};

struct PrivatizedParams {
  LocalParams params;
  std::vector<LedgerEntry> entries;
  std::vector<ClipRecord> clips;
  int sigma2_floor_hits = 0;
};

// Difference clipping and perturbation of every present view. The centers
// are mu_tilde, W_tilde and the prior mean of the noise variance; the bounds
// are clip_multiplier times the prior standard deviations. Only the active
// columns of W are perturbed, so zero padding survives. Noise for parameter
// p of view k is drawn from the substream DeriveSeed(seed, {center, round, k,
// p}).
PrivatizedParams PrivatizeLocalParams(const LocalParams& local,
                                      const GlobalParams& prior,
                                      const ViewLayout& layout,
                                      const PrivacySpec& spec,
                                      const NoiseStream& stream,
                                      const std::string& center_id = "");

}  // namespace fedppca

#endif  // FEDPPCA_DP_H_
