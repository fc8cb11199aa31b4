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

#include <chrono>
#include <cmath>
#include <sstream>

#include "fedppca/client.h"
#include "fedppca/error.h"
#include "fedppca/parallel.h"
#include "fedppca/random.h"

namespace fedppca {
namespace {

// Seed tags that keep the initialization streams apart from the DP ones.
constexpr uint64_t kInitTag = 0x494e4954;
constexpr uint64_t kNoiseTag = 0x4e4f4953;

struct ClientOutput {
  LocalParams params;
  std::vector<LedgerEntry> entries;
  double seconds = 0.0;
  int floor_hits = 0;
  int clipped = 0;
};

std::string CenterName(int c) { return "center-" + std::to_string(c); }

ViewLayout SharedLayout(std::span<const CenterDataset> centers) {
  if (centers.empty()) {
    throw Error(ErrorCode::kViewUnrepresented, "no centers");
  }
  const ViewLayout& layout = centers.front().layout;
  for (size_t c = 0; c < centers.size(); ++c) {
    const CenterDataset& d = centers[c];
    const std::string id = CenterName(static_cast<int>(c));
    if (!(d.layout == layout)) {
      throw Error(ErrorCode::kLayoutMismatch,
                  id + ": view layout differs from center-0");
    }
    try {
      d.Validate();
    } catch (const Error& e) {
      throw Error(e.code(), id + ": " + e.detail());
    }
  }
  for (int k = 0; k < layout.num_views(); ++k) {
    bool seen = false;
    for (const CenterDataset& d : centers) seen = seen || d.has_view(k);
    if (!seen) {
      throw Error(ErrorCode::kViewUnrepresented,
                  "view '" + layout.name(k) + "' is held by no center");
    }
  }
  return layout;
}

}  // namespace

FederationConfig FederationConfig::Centralized(int latent_dim) {
  FederationConfig c;
  c.rounds = 1;
  c.local_iterations = 800;
  c.first_round_iterations = 800;
  c.latent_dim = latent_dim;
  return c;
}

void FederationConfig::Validate() const {
  if (rounds < 1) throw Error(ErrorCode::kInvalidArgument, "rounds must be >= 1");
  if (local_iterations < 0 || first_round_iterations < 0) {
    throw Error(ErrorCode::kInvalidArgument, "iterations must be >= 0");
  }
  if (latent_dim < 1) throw Error(ErrorCode::kInvalidArgument, "latent_dim must be >= 1");
  if (snapshot_every < 0) {
    throw Error(ErrorCode::kInvalidArgument, "snapshot_every must be >= 0");
  }
  for (const auto& [center, iters] : iteration_overrides) {
    if (iters < 0) throw Error(ErrorCode::kInvalidArgument, "iterations must be >= 0");
  }
  if (dp) dp->Validate();
}

FederationResult RunFedMvPpca(const FederationConfig& config,
                              std::span<const CenterDataset> centers,
                              const RoundMetrics& metrics) {
  config.Validate();
  FederationResult result{SharedLayout(centers), {}, {}, {}, {}};
  const ViewLayout& layout = result.layout;
  const int q = config.latent_dim;
  const int num_centers = static_cast<int>(centers.size());
  const GlobalParams seed_prior =
      config.seed_prior ? *config.seed_prior : GlobalParams::SeedPrior(layout, q);
  if (config.dp) seed_prior.Validate(layout);

  std::vector<ClientState> states(num_centers);
  for (int c = 0; c < num_centers; ++c) {
    states[c].center_id = CenterName(c);
    states[c].dataset = centers[c];
  }
  result.local.resize(num_centers);

  InProcessTransport transport(config.dropout);
  GlobalParams global;
  for (int r = 1; r <= config.rounds; ++r) {
    const bool first = r == 1;
    // Clients see the broadcast global, decoded from the wire when the
    // in-process transport is used.
    GlobalParams received;
    if (!first) {
      if (config.transport == TransportKind::kInProcess) {
        received = std::get<GlobalParams>(
            DeserializeParams(transport.LatestGlobal()).params);
      } else {
        received = global;
      }
    }
    const GlobalParams* prior = first ? nullptr : &received;
    const GlobalParams& dp_reference = first ? seed_prior : received;
    const bool privatize =
        config.dp && !(first && config.bootstrap == DpBootstrap::kPermissive);

    std::vector<ClientOutput> outputs(num_centers);
    ParallelFor(
        num_centers,
        [&](int c) {
          ClientState& state = states[c];
          const auto start = std::chrono::steady_clock::now();
          try {
            // Round 1 starts every center from the same draw so that the
            // local solutions share a latent basis and can be averaged.
            const uint64_t init_seed =
                first && config.shared_first_init
                    ? DeriveSeed(config.seed, {kInitTag})
                    : DeriveSeed(config.seed, {kInitTag, static_cast<uint64_t>(c),
                                               static_cast<uint64_t>(r)});
            InitSource source = RandomInit{init_seed};
            if (!first) source = PriorInit{prior, init_seed};
            state.params = InitParams(layout, state.dataset.present_views(), q, source);
            int iterations = first ? config.first_round_iterations
                                   : config.local_iterations;
            if (auto it = config.iteration_overrides.find(c);
                it != config.iteration_overrides.end()) {
              iterations = it->second;
            }
            LocalRoundOptions options;
            options.record_objective = false;
            LocalRoundResult local =
                LocalRound(state, prior, iterations,
                           first ? LocalMode::kEm : LocalMode::kMap, options);
            ClientOutput& out = outputs[c];
            out.floor_hits = local.sigma2_floor_hits;
            if (privatize) {
              PrivatizedParams p = PrivatizeLocalParams(
                  local.params, dp_reference, layout, *config.dp,
                  {DeriveSeed(config.seed, {kNoiseTag}), static_cast<uint64_t>(c),
                   static_cast<uint64_t>(r)},
                  state.center_id);
              out.params = std::move(p.params);
              out.entries = std::move(p.entries);
              out.floor_hits += p.sigma2_floor_hits;
              for (const ClipRecord& clip : p.clips) out.clipped += clip.clipped;
            } else {
              out.params = std::move(local.params);
            }
          } catch (const Error& e) {
            throw Error(e.code(), state.center_id + ": " + e.detail());
          }
          outputs[c].seconds = std::chrono::duration<double>(
                                   std::chrono::steady_clock::now() - start)
                                   .count();
        },
        config.max_workers);

    RoundRecord record;
    record.round = r;
    std::vector<CenterContribution> inputs;
    if (config.transport == TransportKind::kInProcess) {
      std::vector<Message> messages;
      for (int c = 0; c < num_centers; ++c) {
        messages.push_back({c, SerializeParams(outputs[c].params, layout)});
      }
      for (Message& m : transport.Exchange(r, std::move(messages))) {
        inputs.push_back({states[m.center].center_id,
                          std::get<LocalParams>(DeserializeParams(m.payload).params)});
        record.participants.push_back(m.center);
      }
    } else {
      for (int c = 0; c < num_centers; ++c) {
        if (config.dropout.dropped.count({r, c}) != 0) {
          if (config.dropout.policy == DropoutPolicy::kAbort) {
            throw Error(ErrorCode::kClientDropped,
                        "center " + std::to_string(c) + " dropped in round " +
                            std::to_string(r));
          }
          continue;
        }
        inputs.push_back({states[c].center_id, outputs[c].params});
        record.participants.push_back(c);
      }
    }
    for (int c : record.participants) {
      for (const LedgerEntry& e : outputs[c].entries) result.ledger.Append(e);
    }
    for (int c = 0; c < num_centers; ++c) {
      result.local[c] = outputs[c].params;
      record.center_seconds.push_back(outputs[c].seconds);
      record.sigma2_floor_hits += outputs[c].floor_hits;
      record.clipped_releases += outputs[c].clipped;
    }

    global = AggregateRound(inputs, layout, q, config.master, &record.diagnostics);
    const Bytes wire = SerializeParams(global, layout);
    if (config.transport == TransportKind::kInProcess) {
      transport.Broadcast(r, wire);
    }

    for (const GlobalViewParams& g : global.views) {
      record.spreads.push_back({std::sqrt(g.sigma2_mu_tilde),
                                std::sqrt(g.sigma2_w_tilde),
                                std::sqrt(g.noise_variance())});
      record.noise_means.push_back(g.noise_mean());
    }
    if (config.snapshot_every > 0 &&
        (r % config.snapshot_every == 0 || r == config.rounds)) {
      record.snapshot = wire;
    }
    if (config.dp) {
      for (const std::string& id : result.ledger.centers()) {
        const BudgetTotals t = result.ledger.Totals(id);
        record.privacy_totals[id] = {t.epsilon_value(), t.delta_value()};
      }
    }
    if (metrics) record.metrics = metrics(r, global);
    result.history.push_back(std::move(record));
  }
  result.global = std::move(global);
  return result;
}

FederationResult RunDpFedMvPpca(const FederationConfig& config,
                                std::span<const CenterDataset> centers,
                                const RoundMetrics& metrics) {
  if (!config.dp) {
    throw Error(ErrorCode::kInvalidArgument, "DP run needs a privacy spec");
  }
  return RunFedMvPpca(config, centers, metrics);
}

std::string ExportHistory(const FederationResult& result) {
  std::ostringstream out;
  out.precision(17);
  for (const RoundRecord& r : result.history) {
    out << "round=" << r.round << "\tparticipants=" << r.participants.size();
    for (size_t k = 0; k < r.spreads.size(); ++k) {
      const std::string& name = result.layout.name(static_cast<int>(k));
      out << '\t' << name << ".sigma_mu=" << r.spreads[k].sigma_mu << '\t'
          << name << ".sigma_w=" << r.spreads[k].sigma_w << '\t' << name
          << ".sigma_noise=" << r.spreads[k].sigma_noise << '\t' << name
          << ".noise_mean=" << r.noise_means[k];
    }
    out << "\tsigma2_floor_hits=" << r.sigma2_floor_hits
        << "\tspread_floor_hits=" << r.diagnostics.spread_floor_hits
        << "\tclipped=" << r.clipped_releases;
    for (const auto& [name, value] : r.metrics) out << '\t' << name << '=' << value;
    for (const auto& [id, t] : r.privacy_totals) {
      out << '\t' << id << ".epsilon=" << t.first << '\t' << id
          << ".delta=" << t.second;
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace fedppca
