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

#include "fedppca/master.h"

#include <algorithm>
#include <cmath>

#include <random>

#include <gtest/gtest.h>

#include "fedppca/error.h"
#include "test_util.h"

namespace fedppca {
namespace {

using testing::MakeLayout;
using testing::RandomParams;

std::vector<CenterContribution> RandomCenters(const ViewLayout& layout, int q, int count,
                                              Rng& rng) {
  std::vector<CenterContribution> out;
  for (int c = 0; c < count; ++c) {
    out.push_back({"center-" + std::to_string(c), RandomParams(layout, q, rng)});
  }
  return out;
}

CenterContribution WithMu(const std::string& id, const Eigen::VectorXd& mu, int q) {
  LocalParams p(q, 1);
  p.views[0] = ViewParams{mu, Eigen::MatrixXd::Zero(mu.size(), q), 1.0};
  return {id, p};
}

TEST(AggregateMuTest, HandArithmetic) {
  const std::vector<CenterContribution> in = {WithMu("a", Eigen::Vector2d(1, 1), 1),
                                              WithMu("b", Eigen::Vector2d(3, 3), 1)};
  const MeanSpread r = AggregateMu(in, 0);
  EXPECT_EQ(r.mean, Eigen::Vector2d(2, 2));
  EXPECT_DOUBLE_EQ(r.spread, 1.0);
}

TEST(AggregateMuTest, SingleCenterHasZeroSpread) {
  const std::vector<CenterContribution> in = {WithMu("a", Eigen::Vector3d(1, 2, 3), 1)};
  const MeanSpread r = AggregateMu(in, 0);
  EXPECT_EQ(r.mean, Eigen::Vector3d(1, 2, 3));
  EXPECT_EQ(r.spread, 0.0);
}

TEST(AggregateMuTest, MatchesTwoPassOracle) {
  const ViewLayout layout = MakeLayout({6});
  Rng rng(1);
  const auto in = RandomCenters(layout, 2, 5, rng);
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(6);
  for (const auto& c : in) mean += c.params.view(0).mu;
  mean /= 5.0;
  double ss = 0.0;
  for (const auto& c : in) {
    for (int i = 0; i < 6; ++i) ss += std::pow(c.params.view(0).mu(i) - mean(i), 2);
  }
  const MeanSpread r = AggregateMu(in, 0);
  EXPECT_LT((r.mean - mean).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_NEAR(r.spread, ss / (5 * 6), 1e-12);
}

TEST(AggregateMuTest, Unrepresented) {
  std::vector<CenterContribution> in = {{"a", LocalParams(1, 2)}};
  try {
    AggregateMu(in, 0);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kViewUnrepresented);
  }
}

TEST(AggregateWTest, HandArithmetic) {
  LocalParams a(1, 1), b(1, 1);
  a.views[0] = ViewParams{Eigen::VectorXd::Zero(1), Eigen::MatrixXd::Zero(1, 1), 1.0};
  b.views[0] = ViewParams{Eigen::VectorXd::Zero(1), Eigen::MatrixXd::Constant(1, 1, 2.0), 1.0};
  const std::vector<CenterContribution> in = {{"a", a}, {"b", b}};
  const LoadingSpread r = AggregateW(in, 0);
  EXPECT_DOUBLE_EQ(r.mean(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(r.spread, 1.0);
}

TEST(AggregateWTest, MatchesLoopOracle) {
  const ViewLayout layout = MakeLayout({7});
  Rng rng(2);
  const auto in = RandomCenters(layout, 3, 4, rng);
  Eigen::MatrixXd mean = Eigen::MatrixXd::Zero(7, 3);
  for (const auto& c : in) mean += c.params.view(0).w;
  mean /= 4.0;
  double ss = 0.0;
  for (const auto& c : in) {
    for (int i = 0; i < 7; ++i) {
      for (int j = 0; j < 3; ++j) ss += std::pow(c.params.view(0).w(i, j) - mean(i, j), 2);
    }
  }
  const LoadingSpread r = AggregateW(in, 0);
  EXPECT_LT((r.mean - mean).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_NEAR(r.spread, ss / (4 * 7 * 3), 1e-12);
}

TEST(FitInverseGammaTest, RecoversSamplingParameters) {
  Rng rng(3);
  std::gamma_distribution<double> gamma(3.0, 1.0 / 2.0);  // rate beta = 2
  std::vector<double> values(100000);
  for (double& v : values) v = 1.0 / gamma(rng);
  const InverseGammaFit fit = FitInverseGamma(values);
  EXPECT_FALSE(fit.degenerate);
  EXPECT_NEAR(fit.alpha, 3.0, 0.15);
  EXPECT_NEAR(fit.beta, 2.0, 0.1);
}

// Profile log-likelihood in alpha, with beta at its closed-form optimum.
double ProfileLogLik(std::span<const double> x, double alpha) {
  double inv = 0.0, log_sum = 0.0;
  for (double v : x) {
    inv += 1.0 / v;
    log_sum += std::log(v);
  }
  const double n = static_cast<double>(x.size());
  const double beta = n * alpha / inv;
  return n * alpha * std::log(beta) - n * std::lgamma(alpha) - (alpha + 1.0) * log_sum -
         beta * inv;
}

TEST(FitInverseGammaTest, MaximizesProfileLikelihood) {
  Rng rng(4);
  std::gamma_distribution<double> gamma(4.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> values(3 + trial);
    for (double& v : values) v = 1.0 / gamma(rng);
    const InverseGammaFit fit = FitInverseGamma(values);
    if (fit.degenerate || fit.alpha <= kMinAlpha * 1.0001) continue;
    const double best = ProfileLogLik(values, fit.alpha);
    for (double f : {0.9, 0.99, 1.01, 1.1}) {
      EXPECT_GE(best, ProfileLogLik(values, fit.alpha * f) - 1e-9);
    }
    double inv = 0.0;
    for (double v : values) inv += 1.0 / v;
    EXPECT_NEAR(fit.beta, values.size() * fit.alpha / inv, 1e-9 * fit.beta);
  }
}

TEST(FitInverseGammaTest, IdenticalValuesAreDegenerate) {
  const std::vector<double> values = {1.0, 1.0};
  const InverseGammaFit fit = FitInverseGamma(values);
  EXPECT_TRUE(fit.degenerate);
  EXPECT_EQ(fit.alpha, kMaxAlpha);
  EXPECT_NEAR(fit.beta / (fit.alpha - 1.0), 1.0, 1e-6);
}

TEST(FitInverseGammaTest, SingleValueIsDegenerate) {
  const std::vector<double> values = {0.25};
  const InverseGammaFit fit = FitInverseGamma(values);
  EXPECT_TRUE(fit.degenerate);
  EXPECT_NEAR(fit.beta / (fit.alpha - 1.0), 0.25, 1e-9);
}

TEST(FitInverseGammaTest, RejectsNonPositive) {
  const std::vector<double> values = {1.0, -1.0};
  EXPECT_THROW(FitInverseGamma(values), Error);
  EXPECT_THROW(FitInverseGamma(std::vector<double>{}), Error);
}

TEST(FitInverseGammaTest, AlphaGrowsAsValuesConcentrate) {
  double previous = 0.0;
  for (double spread : {0.5, 0.2, 0.1, 0.05, 0.01}) {
    const std::vector<double> values = {1.0 - spread, 1.0, 1.0 + spread};
    const InverseGammaFit fit = FitInverseGamma(values);
    EXPECT_GT(fit.alpha, previous);
    previous = fit.alpha;
  }
}

TEST(InverseGammaMomentMatchTest, ReproducesMoments) {
  for (auto [m, v] : {std::pair{1.0, 0.5}, std::pair{0.04, 1e-5}, std::pair{3.0, 10.0}}) {
    const auto [alpha, beta] = InverseGammaMomentMatch(m, v);
    EXPECT_DOUBLE_EQ(alpha, m * m / v + 2.0);
    EXPECT_NEAR(beta / (alpha - 1.0), m, 1e-12 * m);
    EXPECT_NEAR(beta * beta / ((alpha - 1.0) * (alpha - 1.0) * (alpha - 2.0)), v, 1e-10 * v);
  }
}

TEST(AggregateRoundTest, SingleCenter) {
  const ViewLayout layout = MakeLayout({4});
  Rng rng(5);
  const auto in = RandomCenters(layout, 2, 1, rng);
  AggregationDiagnostics diag;
  const GlobalParams g = AggregateRound(in, layout, 2, {}, &diag);
  EXPECT_EQ(g.views[0].mu_tilde, in[0].params.view(0).mu);
  EXPECT_EQ(g.views[0].w_tilde, in[0].params.view(0).w);
  EXPECT_EQ(g.views[0].sigma2_mu_tilde, 1e-8);
  EXPECT_EQ(g.views[0].sigma2_w_tilde, 1e-8);
  EXPECT_NEAR(g.views[0].noise_mean(), in[0].params.view(0).sigma2, 1e-12);
  EXPECT_TRUE(diag.degenerate_noise[0]);
  EXPECT_EQ(diag.spread_floor_hits, 2);
  EXPECT_EQ(diag.contributors[0], 1);
}

TEST(AggregateRoundTest, MissingViewExcluded) {
  const ViewLayout layout = MakeLayout({3, 2});
  Rng rng(6);
  auto in = RandomCenters(layout, 1, 3, rng);
  in[1].params.views[1].reset();
  const GlobalParams g = AggregateRound(in, layout, 1);
  const Eigen::VectorXd expected = (in[0].params.view(1).mu + in[2].params.view(1).mu) / 2.0;
  EXPECT_LT((g.views[1].mu_tilde - expected).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(AggregateRoundTest, UnrepresentedViewNamed) {
  const ViewLayout layout = MakeLayout({3, 2});
  Rng rng(7);
  auto in = RandomCenters(layout, 1, 2, rng);
  for (auto& c : in) c.params.views[1].reset();
  try {
    AggregateRound(in, layout, 1);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kViewUnrepresented);
    EXPECT_NE(std::string(e.what()).find("v2"), std::string::npos);
  }
}

TEST(AggregateRoundTest, MatchesIndependentFormulas) {
  const ViewLayout layout = MakeLayout({5, 3, 2});
  Rng rng(8);
  const auto in = RandomCenters(layout, 2, 4, rng);
  const GlobalParams g = AggregateRound(in, layout, 2);
  for (int k = 0; k < 3; ++k) {
    const int d = layout.dim(k);
    Eigen::VectorXd mu = Eigen::VectorXd::Zero(d);
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(d, 2);
    for (const auto& c : in) {
      mu += c.params.view(k).mu / 4.0;
      w += c.params.view(k).w / 4.0;
    }
    double smu = 0.0, sw = 0.0;
    for (const auto& c : in) {
      smu += (c.params.view(k).mu - mu).squaredNorm();
      sw += (c.params.view(k).w - w).squaredNorm();
    }
    EXPECT_LT((g.views[k].mu_tilde - mu).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT((g.views[k].w_tilde - w).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_NEAR(g.views[k].sigma2_mu_tilde, std::max(1e-8, smu / (4 * d)), 1e-12);
    EXPECT_NEAR(g.views[k].sigma2_w_tilde, std::max(1e-8, sw / (4 * d * 2)), 1e-12);
    std::vector<double> s2;
    for (const auto& c : in) s2.push_back(c.params.view(k).sigma2);
    const InverseGammaFit fit = FitInverseGamma(s2);
    EXPECT_EQ(g.views[k].alpha, fit.alpha);
    EXPECT_EQ(g.views[k].beta, fit.beta);
  }
}

TEST(AggregateRoundTest, CenterPermutationInvariance) {
  const ViewLayout layout = MakeLayout({4, 3});
  Rng rng(9);
  auto in = RandomCenters(layout, 2, 5, rng);
  const GlobalParams a = AggregateRound(in, layout, 2);
  std::reverse(in.begin(), in.end());
  std::swap(in[0], in[2]);
  const GlobalParams b = AggregateRound(in, layout, 2);
  for (int k = 0; k < 2; ++k) {
    EXPECT_LT((a.views[k].mu_tilde - b.views[k].mu_tilde).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_LT((a.views[k].w_tilde - b.views[k].w_tilde).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_NEAR(a.views[k].sigma2_mu_tilde, b.views[k].sigma2_mu_tilde, 1e-12);
    EXPECT_NEAR(a.views[k].sigma2_w_tilde, b.views[k].sigma2_w_tilde, 1e-12);
    EXPECT_NEAR(a.views[k].alpha, b.views[k].alpha, 1e-9 * a.views[k].alpha);
  }
}

TEST(AggregateRoundTest, IdenticalCentersCollapseSpreads) {
  const ViewLayout layout = MakeLayout({3});
  Rng rng(10);
  const LocalParams p = RandomParams(layout, 2, rng);
  for (int count : {2, 4, 8}) {
    std::vector<CenterContribution> in(count, CenterContribution{"c", p});
    const GlobalParams g = AggregateRound(in, layout, 2);
    EXPECT_EQ(g.views[0].sigma2_mu_tilde, 1e-8);
    EXPECT_EQ(g.views[0].sigma2_w_tilde, 1e-8);
    EXPECT_EQ(g.views[0].alpha, kMaxAlpha);
  }
}

TEST(AggregateMuTest, ScalingCovariance) {
  const ViewLayout layout = MakeLayout({4});
  Rng rng(11);
  auto in = RandomCenters(layout, 1, 3, rng);
  const MeanSpread a = AggregateMu(in, 0);
  const double lambda = 4.0;  // a power of two keeps the scaling exact
  for (auto& c : in) c.params.view(0).mu *= lambda;
  const MeanSpread b = AggregateMu(in, 0);
  EXPECT_EQ(b.mean, lambda * a.mean);
  EXPECT_EQ(b.spread, lambda * lambda * a.spread);
}

}  // namespace
}  // namespace fedppca
