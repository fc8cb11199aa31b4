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

#include "fedppca/client.h"

#include <cmath>
#include <string>

#include "fedppca/error.h"
#include "fedppca/random.h"

namespace fedppca {
namespace {

const GlobalViewParams& PriorView(const GlobalParams& prior, int k) {
  if (k < 0 || k >= prior.num_views()) {
    throw Error(ErrorCode::kViewUnrepresented,
                "prior lacks view " + std::to_string(k));
  }
  return prior.views[k];
}

void CheckSolve(const Eigen::MatrixXd& m, const char* what) {
  if (!m.allFinite()) throw Error(ErrorCode::kSingularUpdate, what);
}

}  // namespace

SufficientStats EStep(const ClientState& state) {
  const int q = state.latent_dim();
  SufficientStats s;
  s.cross.resize(state.dataset.views.size());
  if (state.dataset.size() == 0) {
    s.posterior.means = Eigen::MatrixXd::Zero(0, q);
    s.posterior.precision = Eigen::MatrixXd::Identity(q, q);
    s.posterior.covariance = Eigen::MatrixXd::Identity(q, q);
    s.sum_x = Eigen::VectorXd::Zero(q);
    s.sum_xxT = Eigen::MatrixXd::Zero(q, q);
    for (int k : state.params.present_views()) {
      s.cross[k] = Eigen::MatrixXd::Zero(state.params.view(k).mu.size(), q);
    }
    return s;
  }
  s.posterior = LatentPosterior(state.params, state.dataset);
  const Eigen::MatrixXd& means = s.posterior.means;
  const double n = state.dataset.size();
  s.sum_x = means.colwise().sum().transpose();
  const Eigen::MatrixXd xx = n * s.posterior.covariance + means.transpose() * means;
  s.sum_xxT = 0.5 * (xx + xx.transpose());
  for (int k : state.dataset.present_views()) {
    if (!state.params.has_view(k)) continue;
    const ViewParams& v = state.params.view(k);
    s.cross[k] =
        (state.dataset.view(k).rowwise() - v.mu.transpose()).transpose() * means;
  }
  return s;
}

std::vector<std::optional<Eigen::VectorXd>> UpdateMuAll(
    const ClientState& state, const GlobalParams* prior) {
  const LocalParams& params = state.params;
  std::vector<std::optional<Eigen::VectorXd>> out(params.views.size());
  const int n = state.dataset.size();
  std::vector<int> observed;
  for (int k : params.present_views()) {
    if (n > 0 && state.dataset.has_view(k)) {
      observed.push_back(k);
    } else if (prior == nullptr) {
      out[k] = params.view(k).mu;
    } else {
      out[k] = PriorView(*prior, k).mu_tilde;
    }
  }
  if (observed.empty()) return out;
  if (prior == nullptr) {
    for (int k : observed) {
      out[k] = state.dataset.view(k).colwise().mean().transpose();
    }
    return out;
  }
  // Concatenate the observed views: C = W W^T + Psi couples views through
  // the shared latent, D = blockdiag(s_mu_k I).
  std::vector<int> offset;
  int total = 0;
  for (int k : observed) {
    offset.push_back(total);
    total += static_cast<int>(params.view(k).mu.size());
  }
  const int q = params.latent_dim;
  Eigen::MatrixXd w(total, q);
  Eigen::VectorXd sum_t(total), d_inv(total), mu_tilde(total);
  for (size_t i = 0; i < observed.size(); ++i) {
    const int k = observed[i];
    const ViewParams& v = params.view(k);
    const GlobalViewParams& g = PriorView(*prior, k);
    const int dk = static_cast<int>(v.mu.size());
    w.middleRows(offset[i], dk) = v.w;
    sum_t.segment(offset[i], dk) = state.dataset.view(k).colwise().sum().transpose();
    d_inv.segment(offset[i], dk).setConstant(1.0 / g.sigma2_mu_tilde);
    mu_tilde.segment(offset[i], dk) = g.mu_tilde;
  }
  Eigen::MatrixXd c = w * w.transpose();
  for (size_t i = 0; i < observed.size(); ++i) {
    const ViewParams& v = params.view(observed[i]);
    c.diagonal().segment(offset[i], v.mu.size()).array() += v.sigma2;
  }
  // [N I + C D^-1] mu = sum_t + C D^-1 mu_tilde. With mu = D^1/2 z this is
  // [N I + M] z = D^-1/2 sum_t + M D^-1/2 mu_tilde, M = D^-1/2 C D^-1/2,
  // which stays positive definite when C itself is numerically singular.
  const Eigen::VectorXd s = d_inv.cwiseSqrt();
  Eigen::MatrixXd lhs = s.asDiagonal() * c * s.asDiagonal();
  const Eigen::VectorXd rhs =
      s.cwiseProduct(sum_t) + lhs * s.cwiseProduct(mu_tilde);
  lhs.diagonal().array() += static_cast<double>(n);
  Eigen::LLT<Eigen::MatrixXd> llt(lhs);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorCode::kSingularUpdate, "mu update system");
  }
  const Eigen::VectorXd mu = llt.solve(rhs).cwiseQuotient(s);
  CheckSolve(mu, "mu update produced non-finite values");
  for (size_t i = 0; i < observed.size(); ++i) {
    out[observed[i]] = mu.segment(offset[i], params.view(observed[i]).mu.size());
  }
  return out;
}

Eigen::VectorXd UpdateMu(const ClientState& state, int k,
                         const GlobalParams* prior) {
  state.params.view(k);
  return *UpdateMuAll(state, prior)[k];
}

Eigen::MatrixXd UpdateW(const ClientState& state, int k,
                        const GlobalParams* prior, const SufficientStats& stats) {
  const ViewParams& v = state.params.view(k);
  const int q = state.latent_dim();
  const int d = static_cast<int>(v.mu.size());
  const int a = ActiveColumns(d, q);
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(d, q);
  if (a == 0) return w;
  if (!stats.cross.at(k)) {
    throw Error(ErrorCode::kShapeMismatch, "statistics lack view cross term");
  }
  const Eigen::MatrixXd& cross = *stats.cross[k];
  double ratio = 0.0;
  Eigen::MatrixXd rhs = cross.leftCols(a);
  if (prior != nullptr) {
    const GlobalViewParams& g = PriorView(*prior, k);
    ratio = v.sigma2 / g.sigma2_w_tilde;
    rhs += ratio * g.w_tilde.leftCols(a);
  } else if (stats.size() == 0) {
    return v.w;
  }
  Eigen::MatrixXd lhs = stats.sum_xxT.topLeftCorner(a, a);
  lhs.diagonal().array() += ratio;
  Eigen::LLT<Eigen::MatrixXd> llt(lhs);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorCode::kSingularUpdate, "W update system");
  }
  w.leftCols(a) = llt.solve(rhs.transpose()).transpose();
  CheckSolve(w, "W update produced non-finite values");
  return w;
}

double UpdateSigma2(const ClientState& state, int k, const GlobalParams* prior,
                    const SufficientStats& stats) {
  const ViewParams& v = state.params.view(k);
  const int n = state.dataset.size();
  const double d = static_cast<double>(v.mu.size());
  double residual = 0.0;
  if (n > 0) {
    const Eigen::MatrixXd r = (state.dataset.view(k).rowwise() - v.mu.transpose()) -
                              stats.posterior.means * v.w.transpose();
    residual = r.squaredNorm() +
               n * (v.w * stats.posterior.covariance * v.w.transpose()).trace();
  }
  double sigma2;
  if (prior != nullptr) {
    const GlobalViewParams& g = PriorView(*prior, k);
    sigma2 = (residual + 2.0 * g.beta) / (n * d + 2.0 * (g.alpha + 1.0));
  } else {
    if (n == 0) return v.sigma2;
    sigma2 = residual / (n * d);
  }
  if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) {
    throw Error(ErrorCode::kInvalidVariance,
                "sigma2 update for view " + std::to_string(k) + " is " +
                    std::to_string(sigma2));
  }
  return sigma2;
}

double MapObjective(const ClientState& state, const GlobalParams* prior) {
  double value = 0.0;
  if (state.dataset.size() > 0) {
    value += JointMarginalLogLik(state.params, state.dataset);
  }
  if (prior != nullptr) value += LogPrior(state.params, *prior);
  return value;
}

LocalRoundResult LocalRound(ClientState& state, const GlobalParams* prior,
                            int iterations, LocalMode mode,
                            const LocalRoundOptions& options) {
  if (iterations < 0) {
    throw Error(ErrorCode::kInvalidArgument, "iterations must be >= 0");
  }
  const GlobalParams* active_prior = (mode == LocalMode::kMap) ? prior : nullptr;
  if (mode == LocalMode::kMap && prior == nullptr) {
    throw Error(ErrorCode::kInvalidArgument, "MAP mode requires a prior");
  }
  LocalRoundResult result;
  if (options.record_objective) {
    result.objective.push_back(MapObjective(state, active_prior));
  }
  const std::vector<int> views = state.params.present_views();
  for (int it = 0; it < iterations; ++it) {
    // mu first, evaluated at the current (W, sigma2); the E-step is then taken
    // at the new offsets so W and sigma2 see consistent moments.
    std::vector<std::optional<Eigen::VectorXd>> mus =
        UpdateMuAll(state, active_prior);
    for (int k : views) state.params.view(k).mu = std::move(*mus[k]);
    const SufficientStats stats = EStep(state);
    for (int k : views) {
      state.params.view(k).w = UpdateW(state, k, active_prior, stats);
      double s2 = UpdateSigma2(state, k, active_prior, stats);
      if (s2 < kSigma2Floor) {
        s2 = kSigma2Floor;
        ++result.sigma2_floor_hits;
      }
      state.params.view(k).sigma2 = s2;
    }
    ++state.iteration_counter;
    if (options.record_objective) {
      result.objective.push_back(MapObjective(state, active_prior));
    }
  }
  result.params = state.params;
  return result;
}

LocalParams InitParams(const ViewLayout& layout,
                       const std::vector<int>& present_views, int latent_dim,
                       const InitSource& source) {
  if (latent_dim < 1) {
    throw Error(ErrorCode::kInvalidArgument, "latent_dim must be >= 1");
  }
  LocalParams out(latent_dim, layout.num_views());
  if (const auto* r = std::get_if<RandomInit>(&source)) {
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int k : present_views) {
      // One substream per view: the draw for a view does not depend on which
      // other views the center holds.
      Rng rng(DeriveSeed(r->seed, {static_cast<uint64_t>(k)}));
      const int d = layout.dim(k);
      const int a = ActiveColumns(d, latent_dim);
      ViewParams v;
      v.mu = SampleStandardNormal(d, rng);
      v.w = Eigen::MatrixXd::Zero(d, latent_dim);
      if (a > 0) v.w.leftCols(a) = SampleStandardNormal(d, a, rng);
      v.sigma2 = std::abs(normal(rng)) + 0.1;
      out.views.at(k) = std::move(v);
    }
    return out;
  }
  const PriorInit& p = std::get<PriorInit>(source);
  if (p.prior == nullptr) {
    throw Error(ErrorCode::kInvalidArgument, "prior initialization needs a prior");
  }
  Rng rng(p.seed);
  for (int k : present_views) {
    const GlobalViewParams& g = PriorView(*p.prior, k);
    const int d = layout.dim(k);
    const int a = ActiveColumns(d, latent_dim);
    ViewParams v;
    v.mu = g.mu_tilde + std::sqrt(g.sigma2_mu_tilde) * SampleStandardNormal(d, rng);
    v.w = Eigen::MatrixXd::Zero(d, latent_dim);
    if (a > 0) {
      v.w.leftCols(a) = g.w_tilde.leftCols(a) +
                        std::sqrt(g.sigma2_w_tilde) * SampleStandardNormal(d, a, rng);
    }
    v.sigma2 = SampleInverseGamma(g.alpha, g.beta, rng);
    out.views.at(k) = std::move(v);
  }
  return out;
}

}  // namespace fedppca
