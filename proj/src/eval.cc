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

#include "fedppca/eval.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include <boost/math/distributions/students_t.hpp>

#include "fedppca/client.h"
#include "fedppca/error.h"
#include "fedppca/model.h"

namespace fedppca {
namespace {

ViewLayout LayoutOf(const GlobalParams& global) {
  std::vector<ViewSpec> specs;
  for (int k = 0; k < global.num_views(); ++k) {
    specs.push_back({"v" + std::to_string(k),
                     static_cast<int>(global.views[k].mu_tilde.size())});
  }
  return ViewLayout(std::move(specs));
}

std::vector<int> AllViews(int num_views) {
  std::vector<int> out(num_views);
  std::iota(out.begin(), out.end(), 0);
  return out;
}

void CheckHasObserved(const Record& record) {
  for (const auto& v : record) {
    if (v) return;
  }
  throw Error(ErrorCode::kNoObservedView, "record has no observed view");
}

Eigen::VectorXd Decode(const ViewParams& v, const Eigen::VectorXd& x) {
  return v.w * x + v.mu;
}

}  // namespace

std::vector<Eigen::VectorXd> Reconstruct(const GlobalParams& global,
                                         const Record& record) {
  CheckHasObserved(record);
  const LocalParams point = global.PointEstimate();
  const PosteriorMoments post = LatentPosterior(point, record);
  std::vector<Eigen::VectorXd> out;
  for (int k = 0; k < point.num_views(); ++k) {
    out.push_back(Decode(point.view(k), post.mean));
  }
  return out;
}

std::vector<Eigen::MatrixXd> ReconstructDataset(const GlobalParams& global,
                                                const CenterDataset& data) {
  const LocalParams point = global.PointEstimate();
  const DatasetPosterior post = LatentPosterior(point, data);
  std::vector<Eigen::MatrixXd> out;
  for (int k = 0; k < point.num_views(); ++k) {
    const ViewParams& v = point.view(k);
    Eigen::MatrixXd block = post.means * v.w.transpose();
    block.rowwise() += v.mu.transpose();
    out.push_back(std::move(block));
  }
  return out;
}

std::vector<Eigen::VectorXd> ReconstructSampled(const GlobalParams& global,
                                                const Record& record, Rng& rng) {
  CheckHasObserved(record);
  const ViewLayout layout = LayoutOf(global);
  const LocalParams sample =
      InitParams(layout, AllViews(layout.num_views()), global.latent_dim,
                 PriorInit{&global, rng()});
  const PosteriorMoments post = LatentPosterior(sample, record);
  const Eigen::LLT<Eigen::MatrixXd> llt(post.covariance);
  const Eigen::VectorXd x =
      post.mean + llt.matrixL() * SampleStandardNormal(global.latent_dim, rng);
  std::vector<Eigen::VectorXd> out;
  for (int k = 0; k < sample.num_views(); ++k) out.push_back(Decode(sample.view(k), x));
  return out;
}

double Mae(const GlobalParams& global, const CenterDataset& data) {
  if (data.size() == 0) throw Error(ErrorCode::kInvalidArgument, "empty dataset");
  const std::vector<Eigen::MatrixXd> rec = ReconstructDataset(global, data);
  Eigen::VectorXd per_subject = Eigen::VectorXd::Zero(data.size());
  double count = 0.0;
  for (int k : data.present_views()) {
    per_subject += (data.view(k) - rec[k]).cwiseAbs().rowwise().sum();
    count += static_cast<double>(data.view(k).size());
  }
  // Summing in sorted order makes the result independent of subject order.
  std::sort(per_subject.begin(), per_subject.end());
  return per_subject.sum() / count;
}

double ViewMae(const GlobalParams& global, const CenterDataset& data, int k) {
  const std::vector<Eigen::MatrixXd> rec = ReconstructDataset(global, data);
  return (data.view(k) - rec.at(k)).cwiseAbs().mean();
}

WaicResult Waic(const GlobalParams& global, std::span<const CenterDataset> data,
                const WaicOptions& options) {
  if (options.samples < 2) {
    throw Error(ErrorCode::kInvalidArgument, "WAIC needs at least 2 draws");
  }
  if (data.empty()) throw Error(ErrorCode::kInvalidArgument, "no data");
  const ViewLayout& layout = data.front().layout;
  const int s_count = options.samples;
  int n_total = 0;
  for (const CenterDataset& d : data) n_total += d.size();
  // ll(n, s) = ln p(t_n | theta_s)
  Eigen::MatrixXd ll(n_total, s_count);
  for (int s = 0; s < s_count; ++s) {
    const LocalParams theta =
        InitParams(layout, AllViews(layout.num_views()), global.latent_dim,
                   PriorInit{&global, DeriveSeed(options.seed, {static_cast<uint64_t>(s)})});
    int row = 0;
    for (const CenterDataset& d : data) {
      Eigen::VectorXd col;
      if (options.likelihood == WaicLikelihood::kJoint) {
        col = JointMarginalLogLikRows(theta, d);
      } else {
        col = Eigen::VectorXd::Zero(d.size());
        for (int k : d.present_views()) col += ViewMarginalLogLikRows(theta, k, d.view(k));
      }
      ll.block(row, s, d.size(), 1) = col;
      row += d.size();
    }
  }
  WaicResult out;
  for (int n = 0; n < n_total; ++n) {
    const Eigen::VectorXd v = ll.row(n).transpose();
    const double peak = v.maxCoeff();
    if (!std::isfinite(peak)) {
      throw Error(ErrorCode::kWaicDegenerate,
                  "subject " + std::to_string(n) + " has no finite likelihood");
    }
    out.lppd += peak + std::log((v.array() - peak).exp().sum()) - std::log(s_count);
    const double mean = v.mean();
    out.p_waic += (v.array() - mean).square().sum() / (s_count - 1);
  }
  out.waic = -2.0 * (out.lppd - out.p_waic);
  return out;
}

WaicResult Waic(const GlobalParams& global, const CenterDataset& data,
                const WaicOptions& options) {
  return Waic(global, std::span<const CenterDataset>(&data, 1), options);
}

double Mean(std::span<const double> values) {
  if (values.empty()) throw Error(ErrorCode::kInvalidArgument, "mean of nothing");
  return std::accumulate(values.begin(), values.end(), 0.0) / values.size();
}

double SampleVariance(std::span<const double> values) {
  if (values.size() < 2) return 0.0;
  const double m = Mean(values);
  double ss = 0.0;
  for (double v : values) ss += (v - m) * (v - m);
  return ss / static_cast<double>(values.size() - 1);
}

double WaicStdDiff(std::span<const double> waic_q,
                   std::span<const double> waic_q_minus_1) {
  if (waic_q.empty() || waic_q_minus_1.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "both WAIC samples must be nonempty");
  }
  const double radicand = SampleVariance(waic_q) / waic_q.size() -
                          SampleVariance(waic_q_minus_1) / waic_q_minus_1.size();
  if (!(radicand > 0.0)) {
    throw Error(ErrorCode::kInvalidDenominator,
                "variance difference under the square root is not positive");
  }
  return (Mean(waic_q) - Mean(waic_q_minus_1)) / std::sqrt(radicand);
}

Lda Lda::Fit(const Eigen::MatrixXd& x, std::span<const int> labels) {
  if (static_cast<Eigen::Index>(labels.size()) != x.rows()) {
    throw Error(ErrorCode::kShapeMismatch, "one label per row is required");
  }
  const int dim = static_cast<int>(x.cols());
  Eigen::VectorXd sum[2] = {Eigen::VectorXd::Zero(dim), Eigen::VectorXd::Zero(dim)};
  double count[2] = {0.0, 0.0};
  for (Eigen::Index n = 0; n < x.rows(); ++n) {
    sum[labels[n]] += x.row(n).transpose();
    count[labels[n]] += 1.0;
  }
  if (count[0] == 0.0 || count[1] == 0.0) {
    throw Error(ErrorCode::kDegenerateLabels, "LDA needs both groups in training");
  }
  const Eigen::VectorXd m0 = sum[0] / count[0];
  const Eigen::VectorXd m1 = sum[1] / count[1];
  Eigen::MatrixXd pooled = Eigen::MatrixXd::Zero(dim, dim);
  for (Eigen::Index n = 0; n < x.rows(); ++n) {
    const Eigen::VectorXd r = x.row(n).transpose() - (labels[n] == 0 ? m0 : m1);
    pooled.noalias() += r * r.transpose();
  }
  pooled /= static_cast<double>(x.rows());

  Lda lda;
  Eigen::LLT<Eigen::MatrixXd> llt(pooled);
  const Eigen::VectorXd eig = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(
                                  pooled, Eigen::EigenvaluesOnly).eigenvalues();
  if (llt.info() != Eigen::Success || !(eig.minCoeff() > 1e-12 * eig.maxCoeff())) {
    const double ridge = 1e-6 * std::max(pooled.trace(), 1e-300) / dim;
    pooled.diagonal().array() += ridge;
    llt.compute(pooled);
    lda.ridge_applied_ = true;
  }
  lda.direction_ = llt.solve(m1 - m0);
  lda.offset_ = -lda.direction_.dot(0.5 * (m0 + m1)) + std::log(count[1] / count[0]);
  return lda;
}

int Lda::Predict(const Eigen::VectorXd& x) const {
  return direction_.dot(x) + offset_ > 0.0 ? kGroup2 : kGroup1;
}

std::vector<int> Lda::Predict(const Eigen::MatrixXd& x) const {
  std::vector<int> out;
  for (Eigen::Index n = 0; n < x.rows(); ++n) {
    out.push_back(Predict(Eigen::VectorXd(x.row(n).transpose())));
  }
  return out;
}

Eigen::MatrixXd ProjectLatent(const GlobalParams& global, const CenterDataset& data) {
  return LatentPosterior(global.PointEstimate(), data).means;
}

double Accuracy(std::span<const int> predicted, std::span<const int> labels) {
  if (predicted.size() != labels.size() || labels.empty()) {
    throw Error(ErrorCode::kShapeMismatch, "prediction and label counts differ");
  }
  int hits = 0;
  for (size_t i = 0; i < labels.size(); ++i) hits += predicted[i] == labels[i];
  return static_cast<double>(hits) / static_cast<double>(labels.size());
}

LatentAccuracyResult LatentAccuracy(const GlobalParams& global,
                                    std::span<const CenterDataset> train,
                                    std::span<const CenterDataset> test) {
  auto stack = [&](std::span<const CenterDataset> parts, std::vector<int>& labels) {
    int rows = 0;
    for (const CenterDataset& d : parts) rows += d.size();
    Eigen::MatrixXd x(rows, global.latent_dim);
    int row = 0;
    for (const CenterDataset& d : parts) {
      if (d.size() == 0) continue;
      x.middleRows(row, d.size()) = ProjectLatent(global, d);
      row += d.size();
      labels.insert(labels.end(), d.groups.begin(), d.groups.end());
    }
    return x;
  };
  std::vector<int> train_labels, test_labels;
  const Eigen::MatrixXd x_train = stack(train, train_labels);
  const Eigen::MatrixXd x_test = stack(test, test_labels);
  const Lda lda = Lda::Fit(x_train, train_labels);
  return {Accuracy(lda.Predict(x_test), test_labels), lda.ridge_applied()};
}

Imputation ImputeView(const GlobalParams& global, const Record& record, int k) {
  if (k < 0 || k >= global.num_views()) {
    throw Error(ErrorCode::kInvalidArgument, "view index out of range");
  }
  if (k < static_cast<int>(record.size()) && record[k]) {
    throw Error(ErrorCode::kViewNotMissing, "view " + std::to_string(k) + " is observed");
  }
  CheckHasObserved(record);
  const LocalParams point = global.PointEstimate();
  const PosteriorMoments post = LatentPosterior(point, record);
  const ViewParams& v = point.view(k);
  Imputation out;
  out.mean = Decode(v, post.mean);
  out.stddev = ((v.w * post.covariance * v.w.transpose()).diagonal().array() + v.sigma2)
                   .sqrt();
  return out;
}

DatasetImputation ImputeDatasetView(const GlobalParams& global,
                                    const CenterDataset& data, int k) {
  if (data.has_view(k)) {
    throw Error(ErrorCode::kViewNotMissing,
                "view '" + data.layout.name(k) + "' is observed");
  }
  const LocalParams point = global.PointEstimate();
  const DatasetPosterior post = LatentPosterior(point, data);
  const ViewParams& v = point.view(k);
  DatasetImputation out;
  out.mean = post.means * v.w.transpose();
  out.mean.rowwise() += v.mu.transpose();
  const Eigen::VectorXd sd =
      ((v.w * post.covariance * v.w.transpose()).diagonal().array() + v.sigma2).sqrt();
  out.stddev = sd.transpose().replicate(data.size(), 1);
  return out;
}

std::vector<LongRow> ToLongRows(const MetricsReport& report,
                                const std::string& scenario, int centers,
                                const std::string& method) {
  std::vector<LongRow> rows = {
      {"mae_train", scenario, centers, method, report.mae_train},
      {"mae_test", scenario, centers, method, report.mae_test},
      {"accuracy_latent", scenario, centers, method, report.accuracy_latent},
  };
  if (report.waic) rows.push_back({"waic", scenario, centers, method, *report.waic});
  for (const auto& [view, mae] : report.imputation_mae) {
    rows.push_back({"imputation_mae." + view, scenario, centers, method, mae});
  }
  return rows;
}

std::string FormatLongRows(std::span<const LongRow> rows) {
  std::ostringstream out;
  out.precision(10);
  out << "metric,scenario,centers,method,value\n";
  for (const LongRow& r : rows) {
    out << r.metric << ',' << r.scenario << ',' << r.centers << ',' << r.method
        << ',' << r.value << '\n';
  }
  return out.str();
}

double WelchTTestPValue(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) {
    throw Error(ErrorCode::kInvalidArgument, "Welch test needs two values per sample");
  }
  const double va = SampleVariance(a) / a.size();
  const double vb = SampleVariance(b) / b.size();
  if (!(va + vb > 0.0)) return Mean(a) == Mean(b) ? 1.0 : 0.0;
  const double t = (Mean(a) - Mean(b)) / std::sqrt(va + vb);
  const double df = (va + vb) * (va + vb) /
                    (va * va / (a.size() - 1) + vb * vb / (b.size() - 1));
  const boost::math::students_t dist(df);
  return 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
}

}  // namespace fedppca
