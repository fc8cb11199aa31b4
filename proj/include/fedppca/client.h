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

#ifndef FEDPPCA_CLIENT_H_
#define FEDPPCA_CLIENT_H_

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "fedppca/dataset.h"
#include "fedppca/model.h"
#include "fedppca/params.h"

namespace fedppca {

inline constexpr double kSigma2Floor = 1e-12;

enum class LocalMode {
  kMap,  // EM with the global prior in every update
  kEm,   // plain EM on the expected complete-data log-likelihood
};

struct ClientState {
  std::string center_id;
  CenterDataset dataset;
  LocalParams params;
  int iteration_counter = 0;

  int latent_dim() const { return params.latent_dim; }
};

// E-step output: posterior for every subject plus the aggregates the M-step
// consumes. `cross[k]` is sum_n (t_n^k - mu_k) <x_n>^T.
struct SufficientStats {
  DatasetPosterior posterior;
  Eigen::VectorXd sum_x;
  Eigen::MatrixXd sum_xxT;
  std::vector<std::optional<Eigen::MatrixXd>> cross;

  int size() const { return posterior.size(); }
  PosteriorMoments moments(int n) const { return posterior.moment(n); }
};

SufficientStats EStep(const ClientState& state);

// Closed-form updates of one view. A null `prior` gives the plain EM update.
//
// mu:     [N I + C D^-1]^-1 [sum_n t_n + C D^-1 mu_tilde] over the
//         concatenated observed views, C = W W^T + Psi, D = blockdiag(s_mu I).
//         With one observed view this is [N I + C_k/s_mu]^-1 [sum t +
//         C_k mu_tilde/s_mu]. Views without data return mu_tilde (MAP) or
//         their current value (EM).
// W:      [cross + r W_tilde][sum <xx^T> + r I]^-1,  r = sigma2 / s_w
// sigma2: (sum_n |t - mu - W<x>|^2 + N tr(W S^-1 W^T) + 2 beta)
//         / (N d_k + 2 (alpha + 1))
//
// UpdateW solves over the active columns only and returns zero padding for
// the rest. UpdateSigma2 expects mu and W of view k already replaced in
// `state.params`.
Eigen::VectorXd UpdateMu(const ClientState& state, int k,
                         const GlobalParams* prior);
std::vector<std::optional<Eigen::VectorXd>> UpdateMuAll(
    const ClientState& state, const GlobalParams* prior);
Eigen::MatrixXd UpdateW(const ClientState& state, int k,
                        const GlobalParams* prior, const SufficientStats& stats);
double UpdateSigma2(const ClientState& state, int k, const GlobalParams* prior,
                    const SufficientStats& stats);

// ln p(T | theta) + ln p(theta | prior), the quantity every MAP iteration
// increases; the prior term is dropped when `prior` is null.
double MapObjective(const ClientState& state, const GlobalParams* prior);

struct LocalRoundOptions {
  bool record_objective = true;
};

struct LocalRoundResult {
  LocalParams params;
  // objective[0] is at the input parameters, objective[i] after iteration i.
  std::vector<double> objective;
  int sigma2_floor_hits = 0;
};

// Runs `iterations` EM/MAP iterations in place on `state`. `prior` is
// required for kMap and ignored for kEm.
LocalRoundResult LocalRound(ClientState& state, const GlobalParams* prior,
                            int iterations, LocalMode mode,
                            const LocalRoundOptions& options = {});

struct RandomInit {
  uint64_t seed = 0;
};
struct PriorInit {
  const GlobalParams* prior = nullptr;
  uint64_t seed = 0;
};
using InitSource = std::variant<RandomInit, PriorInit>;

// Random: mu, W entries ~ N(0, 1), sigma2 = |N(0, 1)| + 0.1.
// Prior: mu ~ N(mu_tilde, s_mu I), W ~ MN(W_tilde, I, s_w I),
//        sigma2 ~ InverseGamma(alpha, beta).
LocalParams InitParams(const ViewLayout& layout,
                       const std::vector<int>& present_views, int latent_dim,
                       const InitSource& source);

}  // namespace fedppca

#endif  // FEDPPCA_CLIENT_H_
