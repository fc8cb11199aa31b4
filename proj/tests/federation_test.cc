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

#include "fedppca/federation.h"

#include <cmath>

#include <gtest/gtest.h>

#include "fedppca/data.h"
#include "fedppca/error.h"
#include "fedppca/transport.h"
#include "test_util.h"

namespace fedppca {
namespace {

std::vector<CenterDataset> SmallFederation(Scenario scenario = Scenario::kIid, int centers = 3) {
  SyntheticSpec spec;
  spec.n_subjects = 150;
  spec.view_dims = {6, 4, 5};
  spec.latent_dim = 3;
  spec.shifted_count = 75;
  spec.seed = 11;
  return SplitScenario(GenerateSynthetic(spec).dataset, scenario, centers, 5);
}

FederationConfig SmallConfig() {
  FederationConfig config;
  config.rounds = 6;
  config.local_iterations = 5;
  config.first_round_iterations = 20;
  config.latent_dim = 3;
  config.seed = 7;
  return config;
}

ErrorCode RunError(const FederationConfig& config, std::span<const CenterDataset> centers) {
  try {
    RunFedMvPpca(config, centers);
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::kInvalidArgument;
}

TEST(FederationConfigTest, Validation) {
  FederationConfig c = SmallConfig();
  EXPECT_NO_THROW(c.Validate());
  c.rounds = 0;
  EXPECT_THROW(c.Validate(), Error);
  c = SmallConfig();
  c.latent_dim = 0;
  EXPECT_THROW(c.Validate(), Error);
  c = SmallConfig();
  c.local_iterations = -1;
  EXPECT_THROW(c.Validate(), Error);
  c = SmallConfig();
  c.dp = PrivacySpec{};
  c.dp->delta = 0.7;
  EXPECT_THROW(c.Validate(), Error);
  const FederationConfig central = FederationConfig::Centralized(4);
  EXPECT_EQ(central.rounds, 1);
  EXPECT_EQ(central.first_round_iterations, 800);
}

TEST(FederationTest, DeterministicHistory) {
  const auto centers = SmallFederation();
  const FederationResult a = RunFedMvPpca(SmallConfig(), centers);
  const FederationResult b = RunFedMvPpca(SmallConfig(), centers);
  EXPECT_EQ(ExportHistory(a), ExportHistory(b));
  ASSERT_EQ(a.history.size(), 6u);
  for (size_t r = 0; r < a.history.size(); ++r) {
    EXPECT_EQ(a.history[r].round, static_cast<int>(r) + 1);
    ASSERT_TRUE(a.history[r].snapshot.has_value());
    EXPECT_EQ(*a.history[r].snapshot, *b.history[r].snapshot);
  }
}

TEST(FederationTest, WorkerCountDoesNotChangeResults) {
  const auto centers = SmallFederation();
  FederationConfig serial = SmallConfig();
  serial.max_workers = 1;
  FederationConfig parallel = SmallConfig();
  parallel.max_workers = 3;
  EXPECT_EQ(*RunFedMvPpca(serial, centers).history.back().snapshot,
            *RunFedMvPpca(parallel, centers).history.back().snapshot);
}

TEST(FederationTest, SnapshotMatchesFinalGlobal) {
  const auto centers = SmallFederation();
  const FederationResult r = RunFedMvPpca(SmallConfig(), centers);
  EXPECT_EQ(*r.history.back().snapshot, SerializeParams(r.global, r.layout));
}

TEST(FederationTest, SnapshotThinning) {
  const auto centers = SmallFederation();
  FederationConfig config = SmallConfig();
  config.rounds = 5;
  config.snapshot_every = 2;
  const FederationResult r = RunFedMvPpca(config, centers);
  std::vector<int> kept;
  for (const RoundRecord& rec : r.history) {
    if (rec.snapshot) kept.push_back(rec.round);
  }
  EXPECT_EQ(kept, (std::vector<int>{2, 4, 5}));
}

TEST(FederationTest, TransportTransparency) {
  const auto centers = SmallFederation(Scenario::kGK);
  FederationConfig direct = SmallConfig();
  direct.transport = TransportKind::kDirect;
  const FederationResult a = RunFedMvPpca(SmallConfig(), centers);
  const FederationResult b = RunFedMvPpca(direct, centers);
  EXPECT_EQ(SerializeParams(a.global, a.layout), SerializeParams(b.global, b.layout));
  EXPECT_EQ(ExportHistory(a), ExportHistory(b));
}

TEST(FederationTest, FinalGlobalEqualsAggregateOfLastLocals) {
  const auto centers = SmallFederation();
  const FederationResult r = RunFedMvPpca(SmallConfig(), centers);
  std::vector<CenterContribution> inputs;
  for (size_t c = 0; c < r.local.size(); ++c) {
    inputs.push_back({"c" + std::to_string(c), r.local[c]});
  }
  const GlobalParams oracle = AggregateRound(inputs, r.layout, 3);
  EXPECT_EQ(SerializeParams(oracle, r.layout), SerializeParams(r.global, r.layout));
}

TEST(FederationTest, DropoutSkipAggregatesSurvivors) {
  const auto centers = SmallFederation(Scenario::kIid, 4);
  for (TransportKind kind : {TransportKind::kInProcess, TransportKind::kDirect}) {
    FederationConfig config = SmallConfig();
    config.rounds = 3;
    config.transport = kind;
    config.dropout.dropped = {{3, 1}, {2, 0}};
    const FederationResult r = RunFedMvPpca(config, centers);
    EXPECT_EQ(r.history[0].participants, (std::vector<int>{0, 1, 2, 3}));
    EXPECT_EQ(r.history[1].participants, (std::vector<int>{1, 2, 3}));
    EXPECT_EQ(r.history[2].participants, (std::vector<int>{0, 2, 3}));
    std::vector<CenterContribution> survivors;
    for (int c : {0, 2, 3}) survivors.push_back({"c", r.local[c]});
    EXPECT_EQ(SerializeParams(AggregateRound(survivors, r.layout, 3), r.layout),
              SerializeParams(r.global, r.layout));
  }
}

TEST(FederationTest, DropoutAbort) {
  const auto centers = SmallFederation();
  FederationConfig config = SmallConfig();
  config.dropout.dropped = {{2, 1}};
  config.dropout.policy = DropoutPolicy::kAbort;
  EXPECT_EQ(RunError(config, centers), ErrorCode::kClientDropped);
  config.transport = TransportKind::kDirect;
  EXPECT_EQ(RunError(config, centers), ErrorCode::kClientDropped);
}

TEST(FederationTest, AllClientsDroppedLeavesViewsUnrepresented) {
  const auto centers = SmallFederation();
  FederationConfig config = SmallConfig();
  config.dropout.dropped = {{1, 0}, {1, 1}, {1, 2}};
  EXPECT_EQ(RunError(config, centers), ErrorCode::kViewUnrepresented);
}

TEST(FederationTest, NoCentersOrUnheldView) {
  EXPECT_EQ(RunError(SmallConfig(), {}), ErrorCode::kViewUnrepresented);
  auto centers = SmallFederation();
  for (auto& c : centers) c.RemoveView(2);
  EXPECT_EQ(RunError(SmallConfig(), centers), ErrorCode::kViewUnrepresented);
}

TEST(FederationTest, ClientErrorNamesCenter) {
  auto centers = SmallFederation();
  (*centers[1].views[0])(2, 1) = std::nan("");
  try {
    RunFedMvPpca(SmallConfig(), centers);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidData);
    EXPECT_NE(std::string(e.what()).find("center-1"), std::string::npos) << e.what();
  }
}

TEST(FederationTest, MissingViewScenarioRepresentsEveryView) {
  const auto centers = SmallFederation(Scenario::kGK);
  const FederationResult r = RunFedMvPpca(SmallConfig(), centers);
  ASSERT_EQ(r.global.num_views(), 3);
  EXPECT_EQ(r.history.back().diagnostics.contributors, (std::vector<int>{3, 2, 2}));
  EXPECT_NO_THROW(r.global.Validate(r.layout));
}

TEST(FederationTest, MetricsCallback) {
  const auto centers = SmallFederation();
  FederationConfig config = SmallConfig();
  config.rounds = 3;
  const FederationResult r = RunFedMvPpca(config, centers, [](int round, const GlobalParams&) {
    return std::map<std::string, double>{{"round_sq", double(round * round)}};
  });
  EXPECT_EQ(r.history[2].metrics.at("round_sq"), 9.0);
  EXPECT_NE(ExportHistory(r).find("round_sq=9"), std::string::npos);
}

TEST(DpFederationTest, RequiresSpec) {
  const auto centers = SmallFederation();
  EXPECT_THROW(RunDpFedMvPpca(SmallConfig(), centers), Error);
}

TEST(DpFederationTest, LedgerIncrementsEveryRound) {
  SyntheticSpec spec;
  spec.n_subjects = 120;
  spec.view_dims = {7, 8, 8, 8};
  spec.latent_dim = 3;
  spec.shifted_count = 60;
  const auto centers = SplitScenario(GenerateSynthetic(spec).dataset, Scenario::kIid, 3, 1);
  FederationConfig config = SmallConfig();
  config.rounds = 4;
  config.dp = PrivacySpec{};
  const FederationResult r = RunDpFedMvPpca(config, centers);
  const BudgetTotals per_round = RoundBudget(4, *config.dp);
  EXPECT_EQ(per_round.epsilon, Rational(120));
  for (const std::string id : {"center-0", "center-1", "center-2"}) {
    for (int round = 1; round <= 4; ++round) {
      EXPECT_EQ(r.ledger.RoundTotals(id, round), per_round) << id << " round " << round;
    }
    EXPECT_EQ(r.ledger.Totals(id).epsilon, Rational(480));
    EXPECT_EQ(r.ledger.Totals(id).delta, Rational(0.01) * 32);
    EXPECT_DOUBLE_EQ(r.history[1].privacy_totals.at(id).first, 240.0);
    EXPECT_NEAR(r.history[1].privacy_totals.at(id).second, 0.16, 1e-15);
  }
}

TEST(DpFederationTest, PermissiveBootstrapSkipsFirstRound) {
  const auto centers = SmallFederation();
  FederationConfig config = SmallConfig();
  config.rounds = 3;
  config.dp = PrivacySpec{};
  config.bootstrap = DpBootstrap::kPermissive;
  const FederationResult r = RunDpFedMvPpca(config, centers);
  EXPECT_EQ(r.ledger.RoundTotals("center-0", 1).epsilon, Rational(0));
  EXPECT_EQ(r.ledger.RoundTotals("center-0", 2).epsilon, Rational(90));
  // Round 1 is then identical to the non-private run.
  FederationConfig plain = config;
  plain.dp.reset();
  EXPECT_EQ(*r.history[0].snapshot, *RunFedMvPpca(plain, centers).history[0].snapshot);
}

TEST(DpFederationTest, VanishingNoiseApproachesNonPrivateRun) {
  const auto centers = SmallFederation();
  FederationConfig config = SmallConfig();
  config.dp = PrivacySpec{};
  config.dp->epsilon = 1e15;
  config.dp->clip_multiplier = 1e3;
  config.bootstrap = DpBootstrap::kPermissive;
  const GlobalParams dp = RunDpFedMvPpca(config, centers).global;
  FederationConfig plain = config;
  plain.dp.reset();
  const GlobalParams ref = RunFedMvPpca(plain, centers).global;
  for (int k = 0; k < 3; ++k) {
    const auto& a = dp.views[k];
    const auto& b = ref.views[k];
    EXPECT_LT((a.mu_tilde - b.mu_tilde).norm(), 1e-3 * b.mu_tilde.norm());
    EXPECT_LT((a.w_tilde - b.w_tilde).norm(), 1e-3 * b.w_tilde.norm());
    EXPECT_NEAR(a.noise_mean(), b.noise_mean(), 1e-3 * b.noise_mean());
  }
}

TEST(DpFederationTest, Deterministic) {
  const auto centers = SmallFederation();
  FederationConfig config = SmallConfig();
  config.dp = PrivacySpec{};
  EXPECT_EQ(ExportHistory(RunDpFedMvPpca(config, centers)),
            ExportHistory(RunDpFedMvPpca(config, centers)));
}

TEST(TransportTest, BarrierOrdersMessages) {
  InProcessTransport t;
  std::vector<Message> in = {{2, {3}}, {0, {1}}, {1, {2}}};
  const std::vector<Message> out = t.Exchange(1, in);
  ASSERT_EQ(out.size(), 3u);
  for (int c = 0; c < 3; ++c) {
    EXPECT_EQ(out[c].center, c);
    EXPECT_EQ(out[c].payload, Bytes{static_cast<uint8_t>(c + 1)});
  }
  t.Broadcast(1, {9, 9});
  EXPECT_EQ(t.LatestGlobal(), (Bytes{9, 9}));
  EXPECT_EQ(t.latest_round(), 1);
}

TEST(TransportTest, DropoutPolicies) {
  InProcessTransport skip({{{1, 1}}, DropoutPolicy::kSkip});
  const auto out = skip.Exchange(1, {{0, {}}, {1, {}}, {2, {}}});
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[1].center, 2);
  EXPECT_EQ(skip.drops(), (std::vector<std::pair<int, int>>{{1, 1}}));
  EXPECT_EQ(skip.Exchange(2, {{0, {}}, {1, {}}}).size(), 2u);

  InProcessTransport abort({{{1, 0}}, DropoutPolicy::kAbort});
  EXPECT_THROW(abort.Exchange(1, {{0, {}}}), Error);
}

}  // namespace
}  // namespace fedppca
