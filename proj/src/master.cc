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
#include <limits>
#include <string>

#include "fedppca/error.h"
#include "fedppca/special.h"

namespace fedppca {
namespace {

std::vector<const LocalParams*> Contributors(
    std::span<const CenterContribution> inputs, int k) {
  std::vector<const LocalParams*> out;
  for (const CenterContribution& c : inputs) {
    if (c.params.has_view(k)) out.push_back(&c.params);
  }
  if (out.empty()) {
    throw Error(ErrorCode::kViewUnrepresented,
                "no center contributes view " + std::to_string(k));
  }
  return out;
}

}  // namespace

MeanSpread AggregateMu(std::span<const CenterContribution> inputs, int k) {
  const std::vector<const LocalParams*> holders = Contributors(inputs, k);
  const double c = static_cast<double>(holders.size());
  MeanSpread out;
  out.mean = Eigen::VectorXd::Zero(holders.front()->view(k).mu.size());
  for (const LocalParams* p : holders) out.mean += p->view(k).mu;
  out.mean /= c;
  double ss = 0.0;
  for (const LocalParams* p : holders) ss += (p->view(k).mu - out.mean).squaredNorm();
  out.spread = ss / (c * static_cast<double>(out.mean.size()));
  return out;
}

LoadingSpread AggregateW(std::span<const CenterContribution> inputs, int k) {
  const std::vector<const LocalParams*> holders = Contributors(inputs, k);
  const double c = static_cast<double>(holders.size());
  const Eigen::MatrixXd& first = holders.front()->view(k).w;
  LoadingSpread out;
  out.mean = Eigen::MatrixXd::Zero(first.rows(), first.cols());
  for (const LocalParams* p : holders) out.mean += p->view(k).w;
  out.mean /= c;
  double ss = 0.0;
  for (const LocalParams* p : holders) ss += (p->view(k).w - out.mean).squaredNorm();
  out.spread = ss / (c * static_cast<double>(first.rows() * first.cols()));
  return out;
}

std::pair<double, double> InverseGammaMomentMatch(double mean, double variance) {
  const double alpha = mean * mean / variance + 2.0;
  return {alpha, mean * (alpha - 1.0)};
}

InverseGammaFit FitInverseGamma(std::span<const double> values) {
  if (values.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "inverse-gamma fit needs values");
  }
  for (double v : values) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw Error(ErrorCode::kInvalidArgument,
                  "inverse-gamma fit needs positive finite values");
    }
  }
  const double n = static_cast<double>(values.size());
  double mean = 0.0, mean_inv = 0.0, mean_log_inv = 0.0;
  for (double v : values) {
    mean += v;
    mean_inv += 1.0 / v;
    mean_log_inv += -std::log(v);
  }
  mean /= n;
  mean_inv /= n;
  mean_log_inv /= n;

  InverseGammaFit fit;
  auto degenerate = [&] {
    fit.alpha = kMaxAlpha;
    fit.beta = mean * (kMaxAlpha - 1.0);
    fit.degenerate = true;
    return fit;
  };
  // 1/x ~ Gamma(alpha, rate beta); the profiled score is
  //   f(alpha) = ln(alpha) - psi(alpha) - s,  s = ln(mean 1/x) - mean ln(1/x).
  const double s = std::log(mean_inv) - mean_log_inv;
  if (values.size() < 2 || !(s > 1e-14)) return degenerate();
  auto score = [&](double a) { return LogMinusDigamma(a) - s; };
  // ln(a) - psi(a) decreases monotonically, so a root is unique.
  if (score(kMaxAlpha) >= 0.0) return degenerate();

  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  var /= n;
  double alpha = var > 0.0 ? InverseGammaMomentMatch(mean, var).first : kMinAlpha;
  alpha = std::clamp(alpha, kMinAlpha, kMaxAlpha);
  if (score(kMinAlpha) <= 0.0) {
    alpha = kMinAlpha;
  } else {
    double lo = kMinAlpha, hi = kMaxAlpha;
    for (int it = 0; it < 200; ++it) {
      fit.iterations = it + 1;
      const double f = score(alpha);
      if (f > 0.0) lo = alpha; else hi = alpha;
      const double df = 1.0 / alpha - Trigamma(alpha);
      double next = alpha - f / df;
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      const bool done = std::abs(next - alpha) <= 1e-14 * alpha;
      alpha = next;
      if (done || hi - lo <= 1e-15 * hi) break;
    }
  }
  fit.alpha = alpha;
  fit.beta = alpha / mean_inv;
  return fit;
}

GlobalParams AggregateRound(std::span<const CenterContribution> inputs,
                            const ViewLayout& layout, int latent_dim,
                            const MasterOptions& options,
                            AggregationDiagnostics* diagnostics) {
  GlobalParams out;
  out.latent_dim = latent_dim;
  AggregationDiagnostics diag;
  diag.degenerate_noise.assign(layout.num_views(), false);
  diag.contributors.assign(layout.num_views(), 0);
  for (int k = 0; k < layout.num_views(); ++k) {
    GlobalViewParams g;
    MeanSpread mu;
    try {
      mu = AggregateMu(inputs, k);
    } catch (const Error& e) {
      throw Error(ErrorCode::kViewUnrepresented,
                  "view '" + layout.name(k) + "' is held by no center");
    }
    const LoadingSpread w = AggregateW(inputs, k);
    g.mu_tilde = std::move(mu.mean);
    g.w_tilde = w.mean;
    g.sigma2_mu_tilde = mu.spread;
    g.sigma2_w_tilde = w.spread;
    if (g.sigma2_mu_tilde < options.spread_floor) {
      g.sigma2_mu_tilde = options.spread_floor;
      ++diag.spread_floor_hits;
    }
    if (g.sigma2_w_tilde < options.spread_floor) {
      g.sigma2_w_tilde = options.spread_floor;
      ++diag.spread_floor_hits;
    }
    std::vector<double> noise;
    for (const CenterContribution& c : inputs) {
      if (c.params.has_view(k)) noise.push_back(c.params.view(k).sigma2);
    }
    diag.contributors[k] = static_cast<int>(noise.size());
    const InverseGammaFit ig = FitInverseGamma(noise);
    g.alpha = ig.alpha;
    g.beta = ig.beta;
    diag.degenerate_noise[k] = ig.degenerate;
    out.views.push_back(std::move(g));
  }
  if (diagnostics != nullptr) *diagnostics = std::move(diag);
  return out;
}

}  // namespace fedppca
