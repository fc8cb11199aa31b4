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

#include "fedppca/dp.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>

#include <gtest/gtest.h>

#include "fedppca/error.h"
#include "test_util.h"

namespace fedppca {
namespace {

using testing::MakeLayout;
using testing::RandomParams;
using testing::RandomPrior;

double EmpiricalStd(const std::vector<double>& x) {
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= x.size();
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / (x.size() - 1));
}

ErrorCode CodeOf(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::kInvalidArgument;
}

TEST(LaplaceTest, Scale) { EXPECT_DOUBLE_EQ(LaplaceScale(2.0, 10.0), 0.2); }

TEST(LaplaceTest, EmpiricalStd) {
  Rng rng(1);
  const Eigen::VectorXd noisy = LaplaceMechanism(Eigen::VectorXd::Zero(1000000), 2.0, 10.0, rng);
  const std::vector<double> x(noisy.data(), noisy.data() + noisy.size());
  EXPECT_NEAR(EmpiricalStd(x) / (0.2 * std::sqrt(2.0)), 1.0, 0.01);
}

TEST(LaplaceTest, VanishingNoise) {
  Rng rng(2);
  const Eigen::Vector3d v(1.0, -2.0, 3.0);
  EXPECT_LT((LaplaceMechanism(v, 1.0, 1e9, rng) - v).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(LaplaceTest, RejectsBadSensitivity) {
  Rng rng(3);
  EXPECT_EQ(CodeOf([&] { LaplaceMechanism(Eigen::VectorXd::Zero(2), 0.0, 1.0, rng); }),
            ErrorCode::kInvalidSensitivity);
  EXPECT_EQ(CodeOf([&] { LaplaceScale(-1.0, 1.0); }), ErrorCode::kInvalidSensitivity);
}

TEST(GaussianStdTest, ImprovedKnownValue) {
  EXPECT_NEAR(ImprovedGaussianStd(1.0, 1.0, 0.01), 2.73494, 5e-5);
}

TEST(GaussianStdTest, ClassicKnownValue) {
  EXPECT_DOUBLE_EQ(ClassicGaussianStd(1.0, 0.5, 0.01), std::sqrt(2.0 * std::log(125.0)) / 0.5);
}

TEST(GaussianStdTest, LinearInSensitivity) {
  EXPECT_NEAR(ImprovedGaussianStd(3.0, 2.0, 0.05), 3.0 * ImprovedGaussianStd(1.0, 2.0, 0.05),
              1e-12);
}

TEST(GaussianStdTest, ImprovedNeverExceedsClassic) {
  int points = 0;
  for (int i = 1; i <= 10; ++i) {
    for (int j = 1; j <= 10; ++j) {
      const double eps = i / 11.0;
      const double delta = 0.49 * j / 10.0 - 0.0489;  // covers (0.0001, 0.4411)
      EXPECT_LE(ImprovedGaussianStd(1.0, eps, delta), ClassicGaussianStd(1.0, eps, delta))
          << "eps=" << eps << " delta=" << delta;
      ++points;
    }
  }
  EXPECT_EQ(points, 100);
}

TEST(GaussianStdTest, DomainErrors) {
  EXPECT_EQ(CodeOf([] { ClassicGaussianStd(1.0, 1.0, 0.01); }), ErrorCode::kDpDomainError);
  EXPECT_EQ(CodeOf([] { ImprovedGaussianStd(1.0, 1.0, 0.5); }), ErrorCode::kDpDomainError);
  EXPECT_EQ(CodeOf([] { ImprovedGaussianStd(1.0, 1.0, 0.0); }), ErrorCode::kDpDomainError);
  EXPECT_EQ(CodeOf([] { ImprovedGaussianStd(1.0, 0.0, 0.1); }), ErrorCode::kDpDomainError);
  EXPECT_EQ(CodeOf([] { ImprovedGaussianStd(0.0, 1.0, 0.1); }), ErrorCode::kInvalidSensitivity);
}

TEST(GaussianMechanismTest, EmpiricalStdBothVariants) {
  Rng rng(4);
  for (auto [variant, eps] : {std::pair{GaussianVariant::kImproved, 3.0},
                              std::pair{GaussianVariant::kClassic, 0.7}}) {
    const double s = GaussianStd(0.5, eps, 0.02, variant);
    const Eigen::VectorXd noisy =
        GaussianMechanism(Eigen::VectorXd::Zero(1000000), 0.5, eps, 0.02, variant, rng);
    const std::vector<double> x(noisy.data(), noisy.data() + noisy.size());
    EXPECT_NEAR(EmpiricalStd(x) / s, 1.0, 0.01);
  }
}

TEST(MatrixNormalTest, MatchesFlattenedGaussian) {
  const Eigen::MatrixXd value = Eigen::MatrixXd::Random(4, 3);
  Rng a(5), b(5);
  const Eigen::MatrixXd m =
      MatrixNormalMechanism(value, 1.0, 2.0, 0.01, GaussianVariant::kImproved, a);
  Eigen::VectorXd flat(12);
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 3; ++j) flat(3 * i + j) = value(i, j);
  }
  const Eigen::VectorXd g = GaussianMechanism(flat, 1.0, 2.0, 0.01, GaussianVariant::kImproved, b);
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 3; ++j) EXPECT_EQ(m(i, j), g(3 * i + j));
  }
}

TEST(MatrixNormalTest, EntrywiseStd) {
  Rng rng(6);
  const double s = ImprovedGaussianStd(1.0, 10.0, 0.01);
  std::vector<double> corner, middle;
  for (int t = 0; t < 100000; ++t) {
    const Eigen::MatrixXd m = MatrixNormalMechanism(Eigen::MatrixXd::Zero(2, 2), 1.0, 10.0, 0.01,
                                                    GaussianVariant::kImproved, rng);
    corner.push_back(m(0, 0));
    middle.push_back(m(1, 0));
  }
  EXPECT_NEAR(EmpiricalStd(corner) / s, 1.0, 0.01);
  EXPECT_NEAR(EmpiricalStd(middle) / s, 1.0, 0.01);
}

TEST(MatrixNormalTest, VanishingNoise) {
  Rng rng(7);
  const Eigen::MatrixXd value = Eigen::MatrixXd::Random(3, 2);
  const Eigen::MatrixXd out =
      MatrixNormalMechanism(value, 1.0, 1e15, 0.01, GaussianVariant::kImproved, rng);
  EXPECT_LT((out - value).cwiseAbs().maxCoeff(), 1e-6);
}

// The improved std decays like 1 / sqrt(2 eps), not 1 / eps.
TEST(GaussianStdTest, ImprovedLargeEpsilonAsymptote) {
  for (double eps : {1e9, 1e12}) {
    EXPECT_NEAR(ImprovedGaussianStd(1.0, eps, 0.01) * std::sqrt(2.0 * eps), 1.0, 1e-4);
  }
}

TEST(ClipTest, ShrinksOntoBound) {
  const Eigen::Vector2d v(3.0, 4.0);
  const Eigen::VectorXd c = ClipDifference(Eigen::VectorXd(v), 2.0, 2);
  EXPECT_NEAR(c.norm(), 2.0, 1e-12);
  EXPECT_LE(c.norm(), 2.0);
  EXPECT_NEAR(c.dot(v) / (c.norm() * v.norm()), 1.0, 1e-12);
}

TEST(ClipTest, InsideBoundUnchanged) {
  const Eigen::VectorXd v = Eigen::Vector2d(0.6, 0.8);
  EXPECT_EQ(ClipDifference(v, 2.0, 2), v);
  EXPECT_EQ(ClipDifference(v, 1.4, 1), v);
}

TEST(ClipTest, L1Norm) {
  const Eigen::VectorXd v = Eigen::Vector3d(1.0, -2.0, 3.0);
  const Eigen::VectorXd c = ClipDifference(v, 3.0, 1);
  EXPECT_LE(c.cwiseAbs().sum(), 3.0);
  EXPECT_NEAR(c.cwiseAbs().sum(), 3.0, 1e-12);
}

TEST(ClipTest, RandomBoundsNeverExceeded) {
  Rng rng(8);
  std::uniform_real_distribution<double> scale(-8.0, 8.0);
  std::uniform_int_distribution<int> size(1, 12);
  int violations = 0;
  for (int t = 0; t < 100000; ++t) {
    const int rows = size(rng), cols = size(rng) % 4 + 1;
    const Eigen::MatrixXd m = std::exp(scale(rng)) * SampleStandardNormal(rows, cols, rng);
    const double bound = std::exp(scale(rng));
    const int p = 1 + t % 2;
    if (EntryNorm(ClipDifference(m, bound, p), p) > bound) ++violations;
  }
  EXPECT_EQ(violations, 0);
}

TEST(ClipTest, RejectsNonPositiveBound) {
  EXPECT_THROW(ClipDifference(Eigen::MatrixXd(Eigen::MatrixXd::Ones(1, 1)), 0.0, 2), Error);
}

TEST(PrivacySpecTest, Validation) {
  PrivacySpec spec;
  EXPECT_NO_THROW(spec.Validate());
  spec.variant = GaussianVariant::kClassic;
  EXPECT_EQ(CodeOf([&] { spec.Validate(); }), ErrorCode::kDpDomainError);
  spec.epsilon = 0.5;
  EXPECT_NO_THROW(spec.Validate());
  spec.delta = 0.6;
  EXPECT_EQ(CodeOf([&] { spec.Validate(); }), ErrorCode::kDpDomainError);
  spec = PrivacySpec{};
  spec.norm_order = 3;
  EXPECT_EQ(CodeOf([&] { spec.Validate(); }), ErrorCode::kInvalidArgument);
  spec = PrivacySpec{};
  spec.clip_multiplier = 0.0;
  EXPECT_EQ(CodeOf([&] { spec.Validate(); }), ErrorCode::kInvalidArgument);
}

TEST(PrivacySpecTest, Sigma2IsPureEpsilon) {
  PrivacySpec spec;
  EXPECT_EQ(spec.BudgetFor(SharedParameter::kSigma2).delta, 0.0);
  EXPECT_EQ(spec.BudgetFor(SharedParameter::kW).delta, 0.01);
  spec.w_budget = {2.0, 0.001};
  EXPECT_EQ(spec.BudgetFor(SharedParameter::kW).epsilon, 2.0);
  EXPECT_EQ(spec.BudgetFor(SharedParameter::kMu).epsilon, 10.0);
}

TEST(RoundBudgetTest, KnownValues) {
  const auto [eps, delta] = RoundBudget(4, 10.0, 0.01);
  EXPECT_DOUBLE_EQ(eps, 120.0);
  EXPECT_DOUBLE_EQ(delta, 0.08);
  const auto [eps1, delta1] = RoundBudget(1, 1.0, 0.0);
  EXPECT_EQ(eps1, 3.0);
  EXPECT_EQ(delta1, 0.0);
  EXPECT_THROW(RoundBudget(0, 1.0, 0.1), Error);
}

TEST(RoundBudgetTest, HeterogeneousBudgetsSumExactly) {
  PrivacySpec spec;
  spec.mu_budget = {0.3, 0.001};
  spec.w_budget = {1.7, 0.003};
  spec.sigma2_budget = {0.1, 0.2};
  const BudgetTotals t = RoundBudget(3, spec);
  EXPECT_EQ(t.epsilon, (Rational(0.3) + Rational(1.7) + Rational(0.1)) * 3);
  EXPECT_EQ(t.delta, (Rational(0.001) + Rational(0.003)) * 3);
}

TEST(GlobalParamBudgetTest, ComponentMax) {
  EXPECT_EQ(GlobalParamBudget({{1, 0.01}, {2, 0.001}}), std::make_pair(2.0, 0.01));
  EXPECT_EQ(GlobalParamBudget({{5, 0.2}}), std::make_pair(5.0, 0.2));
  EXPECT_THROW(GlobalParamBudget({}), Error);
  Rng rng(9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<std::pair<double, double>> budgets;
  double max_eps = 0.0, max_delta = 0.0;
  for (int i = 0; i < 100; ++i) {
    budgets.emplace_back(10.0 * u(rng), 0.5 * u(rng));
    max_eps = std::max(max_eps, budgets.back().first);
    max_delta = std::max(max_delta, budgets.back().second);
  }
  EXPECT_EQ(GlobalParamBudget(budgets), std::make_pair(max_eps, max_delta));
}

TEST(PrivatizeTest, VanishingNoiseAtPriorCenter) {
  const ViewLayout layout = MakeLayout({4, 3});
  Rng rng(10);
  const GlobalParams prior = RandomPrior(layout, 2, rng);
  const LocalParams local = prior.PointEstimate();
  PrivacySpec spec;
  spec.epsilon = 1e15;
  const PrivatizedParams out = PrivatizeLocalParams(local, prior, layout, spec, {1, 0, 1});
  for (int k = 0; k < 2; ++k) {
    EXPECT_LT((out.params.view(k).mu - prior.views[k].mu_tilde).cwiseAbs().maxCoeff(), 1e-6);
    EXPECT_LT((out.params.view(k).w - prior.views[k].w_tilde).cwiseAbs().maxCoeff(), 1e-6);
    EXPECT_NEAR(out.params.view(k).sigma2, prior.views[k].noise_mean(), 1e-6);
  }
}

TEST(PrivatizeTest, ClippedDifferencesWithinBound) {
  const ViewLayout layout = MakeLayout({5, 2, 1});
  Rng rng(11);
  std::uniform_real_distribution<double> clip(0.1, 3.0);
  int violations = 0, clipped = 0;
  for (int t = 0; t < 10000; ++t) {
    const GlobalParams prior = RandomPrior(layout, 3, rng);
    const LocalParams local = RandomParams(layout, 3, rng, 0.01, 5.0);
    PrivacySpec spec;
    spec.clip_multiplier = clip(rng);
    spec.norm_order = 1 + t % 2;
    const PrivatizedParams out =
        PrivatizeLocalParams(local, prior, layout, spec, {12, 0, static_cast<uint64_t>(t)});
    ASSERT_EQ(out.clips.size(), 9u);
    for (const ClipRecord& c : out.clips) {
      const GlobalViewParams& g = prior.views[c.view];
      const double sd = c.parameter == SharedParameter::kMu  ? std::sqrt(g.sigma2_mu_tilde)
                        : c.parameter == SharedParameter::kW ? std::sqrt(g.sigma2_w_tilde)
                                                             : std::sqrt(g.noise_variance());
      EXPECT_DOUBLE_EQ(c.bound, spec.clip_multiplier * sd);
      if (c.clipped_norm > c.bound) ++violations;
      clipped += c.clipped;
    }
  }
  EXPECT_EQ(violations, 0);
  EXPECT_GT(clipped, 0);
}

TEST(PrivatizeTest, LedgerEntriesPerView) {
  const ViewLayout layout = MakeLayout({7, 41, 41, 41});
  Rng rng(13);
  const GlobalParams prior = RandomPrior(layout, 6, rng);
  const LocalParams local = RandomParams(layout, 6, rng);
  const PrivatizedParams out =
      PrivatizeLocalParams(local, prior, layout, PrivacySpec{}, {1, 2, 5}, "center-a");
  ASSERT_EQ(out.entries.size(), 12u);
  PrivacyLedger ledger;
  for (const LedgerEntry& e : out.entries) {
    EXPECT_EQ(e.center_id, "center-a");
    EXPECT_EQ(e.round, 5);
    ledger.Append(e);
  }
  const BudgetTotals t = ledger.RoundTotals("center-a", 5);
  EXPECT_EQ(t.epsilon, Rational(120));
  EXPECT_EQ(t.delta, Rational(0.01) * 8);
  EXPECT_EQ(t, RoundBudget(4, PrivacySpec{}));
  EXPECT_NEAR(t.delta_value(), 0.08, 1e-15);
}

TEST(PrivatizeTest, MissingViewsSkipped) {
  const ViewLayout layout = MakeLayout({3, 2});
  Rng rng(14);
  const GlobalParams prior = RandomPrior(layout, 1, rng);
  LocalParams local = RandomParams(layout, 1, rng);
  local.views[0].reset();
  const PrivatizedParams out = PrivatizeLocalParams(local, prior, layout, PrivacySpec{}, {1, 0, 0});
  EXPECT_FALSE(out.params.has_view(0));
  EXPECT_EQ(out.entries.size(), 3u);
  for (const LedgerEntry& e : out.entries) EXPECT_EQ(e.view, 1);
}

TEST(PrivatizeTest, ZeroPaddingSurvives) {
  const ViewLayout layout = MakeLayout({2, 6});
  Rng rng(15);
  const GlobalParams prior = RandomPrior(layout, 4, rng);
  const LocalParams local = RandomParams(layout, 4, rng);
  const PrivatizedParams out = PrivatizeLocalParams(local, prior, layout, PrivacySpec{}, {1, 0, 0});
  EXPECT_TRUE(out.params.view(0).w.rightCols(3).isZero(0.0));
  EXPECT_NO_THROW(out.params.Validate(layout));
}

TEST(PrivatizeTest, NoiseDependsOnlyOnStream) {
  const ViewLayout layout = MakeLayout({3, 3});
  Rng rng(16);
  const GlobalParams prior = RandomPrior(layout, 2, rng);
  const LocalParams local = RandomParams(layout, 2, rng);
  const auto a = PrivatizeLocalParams(local, prior, layout, PrivacySpec{}, {7, 1, 2});
  const auto b = PrivatizeLocalParams(local, prior, layout, PrivacySpec{}, {7, 1, 2});
  const auto c = PrivatizeLocalParams(local, prior, layout, PrivacySpec{}, {7, 2, 2});
  EXPECT_EQ(a.params.view(1).mu, b.params.view(1).mu);
  EXPECT_NE(a.params.view(1).mu, c.params.view(1).mu);
  // Dropping view 0 leaves view 1's noise untouched.
  LocalParams partial = local;
  partial.views[0].reset();
  const auto d = PrivatizeLocalParams(partial, prior, layout, PrivacySpec{}, {7, 1, 2});
  EXPECT_EQ(a.params.view(1).w, d.params.view(1).w);
}

TEST(PrivatizeTest, Sigma2StaysPositive) {
  const ViewLayout layout = MakeLayout({2});
  Rng rng(17);
  GlobalParams prior = RandomPrior(layout, 1, rng);
  prior.views[0].alpha = 2.1;  // heavy prior: wide bound, large Laplace noise
  prior.views[0].beta = 0.01;
  PrivacySpec spec;
  spec.epsilon = 0.1;
  int floor_hits = 0;
  for (uint64_t t = 0; t < 200; ++t) {
    const auto out =
        PrivatizeLocalParams(RandomParams(layout, 1, rng), prior, layout, spec, {3, 0, t});
    EXPECT_GT(out.params.view(0).sigma2, 0.0);
    floor_hits += out.sigma2_floor_hits;
  }
  EXPECT_GT(floor_hits, 0);
}

TEST(LedgerTest, TotalsAndReport) {
  PrivacyLedger a, b;
  for (int r = 1; r <= 3; ++r) {
    a.Append({"x", r, 0, SharedParameter::kMu, "improved_gaussian", 0.1, 0.001});
    b.Append({"y", r, 0, SharedParameter::kSigma2, "laplace", 0.2, 0.0});
  }
  a.Merge(b);
  EXPECT_EQ(a.centers(), (std::vector<std::string>{"x", "y"}));
  EXPECT_EQ(a.Totals("x").epsilon, Rational(0.1) * 3);
  EXPECT_EQ(a.Totals("y").delta, Rational(0));
  EXPECT_EQ(a.RoundTotals("x", 2).epsilon, Rational(0.1));
  const std::string report = a.Report();
  EXPECT_NE(report.find("x\t3\t0.1\t0.001\t0.30000000000000004"),
            std::string::npos)
      << report;
  EXPECT_EQ(std::count(report.begin(), report.end(), '\n'), 7);
}

}  // namespace
}  // namespace fedppca
