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
#include <charconv>
#include <cmath>
#include <map>
#include <numbers>
#include <sstream>

#include "fedppca/client.h"
#include "fedppca/error.h"

namespace fedppca {
namespace {

void CheckSensitivity(double sensitivity) {
  if (!(sensitivity > 0.0) || !std::isfinite(sensitivity)) {
    throw Error(ErrorCode::kInvalidSensitivity,
                "sensitivity must be positive and finite");
  }
}

void CheckEpsilon(double epsilon) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw Error(ErrorCode::kDpDomainError, "epsilon must be positive");
  }
}

void CheckDelta(double delta) {
  if (!(delta > 0.0 && delta < 0.5)) {
    throw Error(ErrorCode::kDpDomainError, "delta must lie in (0, 0.5)");
  }
}

// Shortest decimal that round-trips the nearest double.
std::string FormatRational(const Rational& value) {
  char buf[32];
  const auto result = std::to_chars(buf, buf + sizeof(buf), value.convert_to<double>());
  return std::string(buf, result.ptr);
}

}  // namespace

std::string GaussianVariantName(GaussianVariant variant) {
  return variant == GaussianVariant::kImproved ? "improved_gaussian"
                                               : "classic_gaussian";
}

GaussianVariant ParseGaussianVariant(const std::string& name) {
  if (name == "improved_gaussian") return GaussianVariant::kImproved;
  if (name == "classic_gaussian") return GaussianVariant::kClassic;
  throw Error(ErrorCode::kInvalidArgument, "unknown gaussian variant '" + name + "'");
}

std::string SharedParameterName(SharedParameter parameter) {
  switch (parameter) {
    case SharedParameter::kMu: return "mu";
    case SharedParameter::kW: return "W";
    case SharedParameter::kSigma2: return "sigma2";
  }
  return "unknown";
}

ParameterBudget PrivacySpec::BudgetFor(SharedParameter parameter) const {
  const ParameterBudget* override_budget = nullptr;
  switch (parameter) {
    case SharedParameter::kMu: override_budget = &mu_budget; break;
    case SharedParameter::kW: override_budget = &w_budget; break;
    case SharedParameter::kSigma2: override_budget = &sigma2_budget; break;
  }
  ParameterBudget out = override_budget->epsilon > 0.0
                            ? *override_budget
                            : ParameterBudget{epsilon, delta};
  if (parameter == SharedParameter::kSigma2) out.delta = 0.0;
  return out;
}

void PrivacySpec::Validate() const {
  if (!(clip_multiplier > 0.0) || !std::isfinite(clip_multiplier)) {
    throw Error(ErrorCode::kInvalidArgument, "clip multiplier must be positive");
  }
  if (norm_order != 1 && norm_order != 2) {
    throw Error(ErrorCode::kInvalidArgument, "norm order must be 1 or 2");
  }
  for (SharedParameter p : {SharedParameter::kMu, SharedParameter::kW,
                            SharedParameter::kSigma2}) {
    const ParameterBudget b = BudgetFor(p);
    CheckEpsilon(b.epsilon);
    if (p == SharedParameter::kSigma2) continue;
    CheckDelta(b.delta);
    if (variant == GaussianVariant::kClassic && !(b.epsilon < 1.0)) {
      throw Error(ErrorCode::kDpDomainError,
                  "classic gaussian mechanism needs epsilon < 1");
    }
  }
}

double LaplaceScale(double sensitivity_l1, double epsilon) {
  CheckSensitivity(sensitivity_l1);
  CheckEpsilon(epsilon);
  return sensitivity_l1 / epsilon;
}

double ImprovedGaussianStd(double sensitivity_l2, double epsilon, double delta) {
  CheckSensitivity(sensitivity_l2);
  CheckEpsilon(epsilon);
  CheckDelta(delta);
  const double c = std::sqrt(std::log(2.0 / (std::sqrt(16.0 * delta + 1.0) - 1.0)));
  return (c + std::sqrt(c * c + epsilon)) * sensitivity_l2 /
         (epsilon * std::numbers::sqrt2);
}

double ClassicGaussianStd(double sensitivity_l2, double epsilon, double delta) {
  CheckSensitivity(sensitivity_l2);
  CheckEpsilon(epsilon);
  CheckDelta(delta);
  if (!(epsilon < 1.0)) {
    throw Error(ErrorCode::kDpDomainError,
                "classic gaussian mechanism needs epsilon < 1");
  }
  return std::sqrt(2.0 * std::log(1.25 / delta)) * sensitivity_l2 / epsilon;
}

double GaussianStd(double sensitivity_l2, double epsilon, double delta,
                   GaussianVariant variant) {
  return variant == GaussianVariant::kImproved
             ? ImprovedGaussianStd(sensitivity_l2, epsilon, delta)
             : ClassicGaussianStd(sensitivity_l2, epsilon, delta);
}

Eigen::VectorXd LaplaceMechanism(const Eigen::VectorXd& value,
                                 double sensitivity_l1, double epsilon,
                                 Rng& rng) {
  const double scale = LaplaceScale(sensitivity_l1, epsilon);
  Eigen::VectorXd out = value;
  for (Eigen::Index i = 0; i < out.size(); ++i) out(i) += SampleLaplace(scale, rng);
  return out;
}

Eigen::VectorXd GaussianMechanism(const Eigen::VectorXd& value,
                                  double sensitivity_l2, double epsilon,
                                  double delta, GaussianVariant variant,
                                  Rng& rng) {
  const double s = GaussianStd(sensitivity_l2, epsilon, delta, variant);
  return value + s * SampleStandardNormal(static_cast<int>(value.size()), rng);
}

Eigen::MatrixXd MatrixNormalMechanism(const Eigen::MatrixXd& value,
                                      double sensitivity_l2, double epsilon,
                                      double delta, GaussianVariant variant,
                                      Rng& rng) {
  const double s = GaussianStd(sensitivity_l2, epsilon, delta, variant);
  return value + s * SampleStandardNormal(static_cast<int>(value.rows()),
                                          static_cast<int>(value.cols()), rng);
}

double EntryNorm(const Eigen::MatrixXd& value, int norm_order) {
  return norm_order == 1 ? value.cwiseAbs().sum() : value.norm();
}

Eigen::MatrixXd ClipDifference(const Eigen::MatrixXd& value, double bound,
                               int norm_order) {
  if (!(bound > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "clipping bound must be positive");
  }
  const double ratio = EntryNorm(value, norm_order) / bound;
  if (ratio <= 1.0) return value;
  Eigen::MatrixXd out = value / ratio;
  // Guard against the quotient landing one ulp above the bound.
  while (EntryNorm(out, norm_order) > bound) out *= 1.0 - 1e-15;
  return out;
}

Eigen::VectorXd ClipDifference(const Eigen::VectorXd& value, double bound,
                               int norm_order) {
  return ClipDifference(Eigen::MatrixXd(value), bound, norm_order).col(0);
}

void PrivacyLedger::Append(const LedgerEntry& entry) { entries_.push_back(entry); }

void PrivacyLedger::Merge(const PrivacyLedger& other) {
  entries_.insert(entries_.end(), other.entries_.begin(), other.entries_.end());
}

std::vector<std::string> PrivacyLedger::centers() const {
  std::vector<std::string> out;
  for (const LedgerEntry& e : entries_) {
    if (std::find(out.begin(), out.end(), e.center_id) == out.end()) {
      out.push_back(e.center_id);
    }
  }
  return out;
}

BudgetTotals PrivacyLedger::Totals(const std::string& center_id) const {
  BudgetTotals t;
  for (const LedgerEntry& e : entries_) {
    if (e.center_id != center_id) continue;
    t.epsilon += Rational(e.epsilon);
    t.delta += Rational(e.delta);
  }
  return t;
}

BudgetTotals PrivacyLedger::RoundTotals(const std::string& center_id,
                                        int round) const {
  BudgetTotals t;
  for (const LedgerEntry& e : entries_) {
    if (e.center_id != center_id || e.round != round) continue;
    t.epsilon += Rational(e.epsilon);
    t.delta += Rational(e.delta);
  }
  return t;
}

std::string PrivacyLedger::Report() const {
  std::map<std::pair<std::string, int>, BudgetTotals> per_round;
  for (const LedgerEntry& e : entries_) {
    BudgetTotals& t = per_round[{e.center_id, e.round}];
    t.epsilon += Rational(e.epsilon);
    t.delta += Rational(e.delta);
  }
  std::ostringstream out;
  out << "center\tround\tround_epsilon\tround_delta\ttotal_epsilon\ttotal_delta\n";
  std::map<std::string, BudgetTotals> cumulative;
  for (const auto& [key, t] : per_round) {
    BudgetTotals& c = cumulative[key.first];
    c.epsilon += t.epsilon;
    c.delta += t.delta;
    out << key.first << '\t' << key.second << '\t' << FormatRational(t.epsilon)
        << '\t' << FormatRational(t.delta) << '\t' << FormatRational(c.epsilon)
        << '\t' << FormatRational(c.delta) << '\n';
  }
  return out.str();
}

std::pair<double, double> RoundBudget(int num_views, double epsilon,
                                      double delta) {
  if (num_views < 1) {
    throw Error(ErrorCode::kInvalidArgument, "round budget needs at least one view");
  }
  return {3.0 * num_views * epsilon, 2.0 * num_views * delta};
}

BudgetTotals RoundBudget(int num_views, const PrivacySpec& spec) {
  if (num_views < 1) {
    throw Error(ErrorCode::kInvalidArgument, "round budget needs at least one view");
  }
  BudgetTotals t;
  for (SharedParameter p : {SharedParameter::kMu, SharedParameter::kW,
                            SharedParameter::kSigma2}) {
    const ParameterBudget b = spec.BudgetFor(p);
    t.epsilon += Rational(b.epsilon) * num_views;
    t.delta += Rational(b.delta) * num_views;
  }
  return t;
}

std::pair<double, double> GlobalParamBudget(
    const std::vector<std::pair<double, double>>& per_center) {
  if (per_center.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "global budget needs at least one center");
  }
  std::pair<double, double> out = per_center.front();
  for (const auto& [eps, delta] : per_center) {
    out.first = std::max(out.first, eps);
    out.second = std::max(out.second, delta);
  }
  return out;
}

PrivatizedParams PrivatizeLocalParams(const LocalParams& local,
                                      const GlobalParams& prior,
                                      const ViewLayout& layout,
                                      const PrivacySpec& spec,
                                      const NoiseStream& stream,
                                      const std::string& center_id) {
  spec.Validate();
  PrivatizedParams out;
  out.params = local;
  const int q = local.latent_dim;
  for (int k : local.present_views()) {
    const GlobalViewParams& g = prior.views.at(k);
    ViewParams& v = out.params.view(k);
    auto rng_for = [&](SharedParameter p) {
      return Rng(DeriveSeed(stream.seed, {stream.center, stream.round,
                                          static_cast<uint64_t>(k),
                                          static_cast<uint64_t>(p)}));
    };
    auto record = [&](SharedParameter p, double norm, double clipped_norm,
                      double bound, const std::string& mechanism) {
      out.clips.push_back({k, p, norm, clipped_norm, bound, norm > bound});
      const ParameterBudget b = spec.BudgetFor(p);
      out.entries.push_back({center_id, static_cast<int>(stream.round), k, p,
                             mechanism, b.epsilon, b.delta});
    };

    {
      const ParameterBudget b = spec.BudgetFor(SharedParameter::kMu);
      const double bound = spec.clip_multiplier * std::sqrt(g.sigma2_mu_tilde);
      const Eigen::VectorXd diff = v.mu - g.mu_tilde;
      const Eigen::VectorXd clipped = ClipDifference(diff, bound, spec.norm_order);
      Rng rng = rng_for(SharedParameter::kMu);
      v.mu = g.mu_tilde + GaussianMechanism(clipped, 2.0 * bound, b.epsilon,
                                            b.delta, spec.variant, rng);
      record(SharedParameter::kMu, EntryNorm(diff, spec.norm_order),
             EntryNorm(clipped, spec.norm_order), bound,
             GaussianVariantName(spec.variant));
    }
    {
      const ParameterBudget b = spec.BudgetFor(SharedParameter::kW);
      const int active = ActiveColumns(layout.dim(k), q);
      const double bound = spec.clip_multiplier * std::sqrt(g.sigma2_w_tilde);
      const Eigen::MatrixXd diff =
          v.w.leftCols(active) - g.w_tilde.leftCols(active);
      double norm = 0.0, clipped_norm = 0.0;
      if (active > 0) {
        norm = EntryNorm(diff, spec.norm_order);
        const Eigen::MatrixXd clipped = ClipDifference(diff, bound, spec.norm_order);
        clipped_norm = EntryNorm(clipped, spec.norm_order);
        Rng rng = rng_for(SharedParameter::kW);
        v.w.leftCols(active) =
            g.w_tilde.leftCols(active) +
            MatrixNormalMechanism(clipped, 2.0 * bound, b.epsilon, b.delta,
                                  spec.variant, rng);
      }
      record(SharedParameter::kW, norm, clipped_norm, bound, "matrix_normal");
    }
    {
      const ParameterBudget b = spec.BudgetFor(SharedParameter::kSigma2);
      const double center = g.noise_mean();
      const double bound = spec.clip_multiplier * std::sqrt(g.noise_variance());
      const double diff = v.sigma2 - center;
      const double clipped = std::clamp(diff, -bound, bound);
      Rng rng = rng_for(SharedParameter::kSigma2);
      double noisy = center + clipped +
                     SampleLaplace(LaplaceScale(2.0 * bound, b.epsilon), rng);
      if (!(noisy >= kSigma2Floor)) {
        noisy = kSigma2Floor;
        ++out.sigma2_floor_hits;
      }
      v.sigma2 = noisy;
      record(SharedParameter::kSigma2, std::abs(diff), std::abs(clipped), bound,
             "laplace");
    }
  }
  return out;
}

}  // namespace fedppca
