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

#include "fedppca/model.h"

#include <cmath>
#include <numbers>
#include <string>

#include "fedppca/error.h"

namespace fedppca {
namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

struct ObservedSystem {
  Eigen::MatrixXd precision;
  Eigen::LLT<Eigen::MatrixXd> llt;
};

void CheckViewShape(const ViewParams& v, const Eigen::VectorXd& t, int k) {
  if (t.size() != v.mu.size()) {
    throw Error(ErrorCode::kShapeMismatch,
                "record view " + std::to_string(k) + " has length " +
                    std::to_string(t.size()));
  }
  if (!t.allFinite()) {
    throw Error(ErrorCode::kInvalidData,
                "non-finite record value in view " + std::to_string(k));
  }
}

void Factorize(ObservedSystem& sys) {
  sys.llt.compute(sys.precision);
  if (sys.llt.info() != Eigen::Success || !sys.precision.allFinite()) {
    throw Error(ErrorCode::kSingularPosterior,
                "posterior precision is not positive definite");
  }
}

double LogDetFromLlt(const Eigen::LLT<Eigen::MatrixXd>& llt) {
  return 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
}

}  // namespace

PosteriorMoments DatasetPosterior::moment(int n) const {
  PosteriorMoments m;
  m.mean = means.row(n).transpose();
  m.precision = precision;
  m.covariance = covariance;
  m.second_moment = covariance + m.mean * m.mean.transpose();
  return m;
}

SampledSubject SampleSubject(const LocalParams& params, const ViewLayout& layout,
                             Rng& rng) {
  for (int k = 0; k < layout.num_views(); ++k) {
    if (!params.has_view(k)) {
      throw Error(ErrorCode::kViewParamsMissing,
                  "no parameters for view '" + layout.name(k) + "'");
    }
  }
  SampledSubject s;
  s.latent = SampleStandardNormal(params.latent_dim, rng);
  s.record.resize(layout.num_views());
  for (int k = 0; k < layout.num_views(); ++k) {
    const ViewParams& v = params.view(k);
    const Eigen::VectorXd noise =
        std::sqrt(v.sigma2) * SampleStandardNormal(layout.dim(k), rng);
    s.record[k] = v.w * s.latent + v.mu + noise;
  }
  return s;
}

Eigen::MatrixXd MarginalViewCovariance(const LocalParams& params, int k) {
  const ViewParams& v = params.view(k);
  Eigen::MatrixXd c = v.w * v.w.transpose();
  c.diagonal().array() += v.sigma2;
  return c;
}

PosteriorMoments LatentPosterior(const LocalParams& params,
                                 const Record& record) {
  const int q = params.latent_dim;
  ObservedSystem sys;
  sys.precision = Eigen::MatrixXd::Identity(q, q);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(q);
  bool any = false;
  const int nv = std::min<int>(params.num_views(), record.size());
  for (int k = 0; k < nv; ++k) {
    if (!record[k] || !params.has_view(k)) continue;
    const ViewParams& v = params.view(k);
    CheckViewShape(v, *record[k], k);
    sys.precision.noalias() += v.w.transpose() * v.w / v.sigma2;
    b.noalias() += v.w.transpose() * (*record[k] - v.mu) / v.sigma2;
    any = true;
  }
  if (!any) {
    throw Error(ErrorCode::kNoObservedView,
                "record shares no observed view with the parameters");
  }
  Factorize(sys);
  PosteriorMoments m;
  m.precision = sys.precision;
  m.covariance = sys.llt.solve(Eigen::MatrixXd::Identity(q, q));
  m.mean = sys.llt.solve(b);
  if (!m.mean.allFinite()) {
    throw Error(ErrorCode::kSingularPosterior, "non-finite posterior mean");
  }
  m.second_moment = m.covariance + m.mean * m.mean.transpose();
  return m;
}

DatasetPosterior LatentPosterior(const LocalParams& params,
                                 const CenterDataset& data) {
  const int q = params.latent_dim;
  ObservedSystem sys;
  sys.precision = Eigen::MatrixXd::Identity(q, q);
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(data.size(), q);
  bool any = false;
  for (int k : data.present_views()) {
    if (!params.has_view(k)) continue;
    const ViewParams& v = params.view(k);
    const Eigen::MatrixXd& t = data.view(k);
    if (t.cols() != v.mu.size()) {
      throw Error(ErrorCode::kShapeMismatch,
                  "dataset view " + std::to_string(k) + " width");
    }
    sys.precision.noalias() += v.w.transpose() * v.w / v.sigma2;
    b.noalias() += ((t.rowwise() - v.mu.transpose()) * v.w) / v.sigma2;
    any = true;
  }
  if (!any) {
    throw Error(ErrorCode::kNoObservedView,
                "dataset shares no observed view with the parameters");
  }
  Factorize(sys);
  DatasetPosterior out;
  out.precision = sys.precision;
  out.covariance = sys.llt.solve(Eigen::MatrixXd::Identity(q, q));
  out.means = sys.llt.solve(b.transpose()).transpose();
  if (!out.means.allFinite()) {
    throw Error(ErrorCode::kSingularPosterior, "non-finite posterior mean");
  }
  return out;
}

Eigen::VectorXd ViewMarginalLogLikRows(const LocalParams& params, int k,
                                       const Eigen::MatrixXd& data) {
  const ViewParams& v = params.view(k);
  if (data.cols() != v.mu.size()) {
    throw Error(ErrorCode::kShapeMismatch, "data width differs from d_k");
  }
  if (!data.allFinite()) {
    throw Error(ErrorCode::kInvalidData, "non-finite data");
  }
  const int q = params.latent_dim;
  const int d = static_cast<int>(v.mu.size());
  // |C| = sigma2^d |Sigma_k| and C^-1 = (I - W Sigma_k^-1 W^T / sigma2)/sigma2
  // with Sigma_k = I + W^T W / sigma2.
  ObservedSystem sys;
  sys.precision = Eigen::MatrixXd::Identity(q, q) + v.w.transpose() * v.w / v.sigma2;
  Factorize(sys);
  const double log_det = d * std::log(v.sigma2) + LogDetFromLlt(sys.llt);
  const Eigen::MatrixXd r = data.rowwise() - v.mu.transpose();
  const Eigen::MatrixXd b = (r * v.w) / v.sigma2;  // N x q
  const Eigen::MatrixXd sb = sys.llt.solve(b.transpose());
  const Eigen::VectorXd quad =
      r.rowwise().squaredNorm() / v.sigma2 -
      (b.transpose().array() * sb.array()).colwise().sum().matrix().transpose();
  return -0.5 * (quad.array() + d * kLog2Pi + log_det);
}

double ViewMarginalLogLik(const LocalParams& params, int k,
                          const Eigen::MatrixXd& data) {
  return ViewMarginalLogLikRows(params, k, data).sum();
}

double JointMarginalLogLik(const LocalParams& params, const Record& record) {
  CenterDataset one;
  one.views.resize(record.size());
  one.ids = {"_"};
  one.groups = {kGroup1};
  for (size_t k = 0; k < record.size(); ++k) {
    if (record[k]) one.views[k] = record[k]->transpose();
  }
  return JointMarginalLogLik(params, one);
}

Eigen::VectorXd JointMarginalLogLikRows(const LocalParams& params,
                                        const CenterDataset& data) {
  const int q = params.latent_dim;
  ObservedSystem sys;
  sys.precision = Eigen::MatrixXd::Identity(q, q);
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(data.size(), q);
  Eigen::VectorXd quad = Eigen::VectorXd::Zero(data.size());
  double log_det = 0.0;
  int dims = 0;
  bool any = false;
  for (int k : data.present_views()) {
    if (!params.has_view(k)) continue;
    const ViewParams& v = params.view(k);
    const Eigen::MatrixXd& t = data.view(k);
    if (t.cols() != v.mu.size()) {
      throw Error(ErrorCode::kShapeMismatch, "dataset view width");
    }
    if (!t.allFinite()) throw Error(ErrorCode::kInvalidData, "non-finite data");
    const Eigen::MatrixXd r = t.rowwise() - v.mu.transpose();
    sys.precision.noalias() += v.w.transpose() * v.w / v.sigma2;
    b.noalias() += (r * v.w) / v.sigma2;
    quad += r.rowwise().squaredNorm() / v.sigma2;
    log_det += v.mu.size() * std::log(v.sigma2);
    dims += static_cast<int>(v.mu.size());
    any = true;
  }
  if (!any) {
    throw Error(ErrorCode::kNoObservedView,
                "dataset shares no observed view with the parameters");
  }
  Factorize(sys);
  log_det += LogDetFromLlt(sys.llt);
  const Eigen::MatrixXd sb = sys.llt.solve(b.transpose());
  quad -= (b.transpose().array() * sb.array()).colwise().sum().matrix().transpose();
  return -0.5 * (quad.array() + dims * kLog2Pi + log_det);
}

double JointMarginalLogLik(const LocalParams& params,
                           const CenterDataset& data) {
  return JointMarginalLogLikRows(params, data).sum();
}

double ExpectedCompleteLogLik(const LocalParams& params,
                              const CenterDataset& data,
                              std::span<const PosteriorMoments> moments) {
  if (static_cast<int>(moments.size()) != data.size()) {
    throw Error(ErrorCode::kShapeMismatch,
                "one set of moments is required per subject");
  }
  const int q = params.latent_dim;
  double total = 0.0;
  for (int n = 0; n < data.size(); ++n) {
    const PosteriorMoments& m = moments[n];
    if (m.mean.size() != q || m.second_moment.rows() != q ||
        m.second_moment.cols() != q) {
      throw Error(ErrorCode::kShapeMismatch, "moment dimension");
    }
    double inner = 0.0;
    for (int k : data.present_views()) {
      if (!params.has_view(k)) continue;
      const ViewParams& v = params.view(k);
      const Eigen::VectorXd r = data.view(k).row(n).transpose() - v.mu;
      if (r.size() != v.mu.size()) {
        throw Error(ErrorCode::kShapeMismatch, "dataset view width");
      }
      const double dk = static_cast<double>(v.mu.size());
      inner += 0.5 * dk * std::log(v.sigma2) +
               0.5 * r.squaredNorm() / v.sigma2 +
               0.5 * (v.w.transpose() * v.w * m.second_moment).trace() /
                   v.sigma2 -
               m.mean.dot(v.w.transpose() * r) / v.sigma2;
    }
    inner += 0.5 * m.second_moment.trace();
    total -= inner;
  }
  return total;
}

double PosteriorEntropy(const PosteriorMoments& moments) {
  const int q = static_cast<int>(moments.mean.size());
  Eigen::LLT<Eigen::MatrixXd> llt(moments.precision);
  return 0.5 * q * (1.0 + kLog2Pi) - 0.5 * LogDetFromLlt(llt);
}

double LogPrior(const LocalParams& params, const GlobalParams& prior) {
  const int q = params.latent_dim;
  double total = 0.0;
  for (int k : params.present_views()) {
    const ViewParams& v = params.view(k);
    const GlobalViewParams& g = prior.views.at(k);
    const double d = static_cast<double>(v.mu.size());
    total += -0.5 * d * (kLog2Pi + std::log(g.sigma2_mu_tilde)) -
             0.5 * (v.mu - g.mu_tilde).squaredNorm() / g.sigma2_mu_tilde;
    const int a = ActiveColumns(static_cast<int>(v.mu.size()), q);
    if (a > 0) {
      total += -0.5 * d * a * (kLog2Pi + std::log(g.sigma2_w_tilde)) -
               0.5 * (v.w.leftCols(a) - g.w_tilde.leftCols(a)).squaredNorm() /
                   g.sigma2_w_tilde;
    }
    total += g.alpha * std::log(g.beta) - std::lgamma(g.alpha) -
             (g.alpha + 1.0) * std::log(v.sigma2) - g.beta / v.sigma2;
  }
  return total;
}

}  // namespace fedppca
