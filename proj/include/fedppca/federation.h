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

#ifndef FEDPPCA_FEDERATION_H_
#define FEDPPCA_FEDERATION_H_

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fedppca/dataset.h"
#include "fedppca/dp.h"
#include "fedppca/master.h"
#include "fedppca/params.h"
#include "fedppca/serialize.h"
#include "fedppca/transport.h"

namespace fedppca {

enum class TransportKind {
  kInProcess,  // messages are serialized and exchanged through the transport
  kDirect,     // parameters are handed over as objects
};

enum class DpBootstrap {
  kSeedPrior,   // round 1 is privatized against `seed_prior`
  kPermissive,  // round 1 parameters are sent unperturbed
};

struct FederationConfig {
  int rounds = 100;
  int local_iterations = 15;
  int first_round_iterations = 30;
  int latent_dim = 5;
  uint64_t seed = 0;
  std::optional<PrivacySpec> dp;
  DpBootstrap bootstrap = DpBootstrap::kSeedPrior;
  // Clipping reference for round 1; SeedPrior() of the layout when unset.
  std::optional<GlobalParams> seed_prior;
  // Round-1 random initialization drawn from one seed for all centers
  // (views a center lacks are simply not drawn).
  bool shared_first_init = true;
  MasterOptions master;
  TransportKind transport = TransportKind::kInProcess;
  DropoutPlan dropout;
  // Center index -> local iterations used instead of local_iterations.
  std::map<int, int> iteration_overrides;
  // Keep a GlobalParams snapshot every `snapshot_every` rounds (and always
  // the last one); 0 disables snapshots.
  int snapshot_every = 1;
  int max_workers = 0;

  // One center, one round of 800 EM iterations.
  static FederationConfig Centralized(int latent_dim);

  void Validate() const;
};

struct ViewSpread {
  double sigma_mu = 0.0;     // sqrt(sigma2_mu_tilde)
  double sigma_w = 0.0;      // sqrt(sigma2_w_tilde)
  double sigma_noise = 0.0;  // standard deviation of the noise prior
};

struct RoundRecord {
  int round = 0;
  std::vector<int> participants;
  std::vector<double> center_seconds;  // wall time, not deterministic
  std::optional<Bytes> snapshot;       // serialized GlobalParams
  std::vector<ViewSpread> spreads;
  std::vector<double> noise_means;
  AggregationDiagnostics diagnostics;
  int sigma2_floor_hits = 0;
  int clipped_releases = 0;
  std::map<std::string, double> metrics;
  // Cumulative (epsilon, delta) per center id after this round.
  std::map<std::string, std::pair<double, double>> privacy_totals;
};

using RoundMetrics =
    std::function<std::map<std::string, double>(int round, const GlobalParams&)>;

struct FederationResult {
  ViewLayout layout;
  GlobalParams global;
  std::vector<LocalParams> local;  // last local update of every center
  std::vector<RoundRecord> history;
  PrivacyLedger ledger;
};

// Runs the federated rounds. With config.dp set every client update is
// clipped and perturbed before it leaves the center. Client failures are
// rethrown with the center id prefixed to the message.
FederationResult RunFedMvPpca(const FederationConfig& config,
                              std::span<const CenterDataset> centers,
                              const RoundMetrics& metrics = nullptr);
// Same as RunFedMvPpca but requires config.dp.
FederationResult RunDpFedMvPpca(const FederationConfig& config,
                                std::span<const CenterDataset> centers,
                                const RoundMetrics& metrics = nullptr);

// One tab-separated line per round: round, per-view spreads and noise
// means, metrics and privacy totals. Wall times are left out so the export
// is reproducible.
std::string ExportHistory(const FederationResult& result);

}  // namespace fedppca

#endif  // FEDPPCA_FEDERATION_H_
