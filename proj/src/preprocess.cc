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

#include <algorithm>
#include <array>
#include <cmath>
#include <random>

#include "fedppca/data.h"
#include "fedppca/error.h"
#include "fedppca/random.h"

namespace fedppca {

Scaler FitScaler(std::span<const CenterDataset> train, ScaleMode mode) {
  if (train.empty()) throw Error(ErrorCode::kInvalidArgument, "no training data");
  const ViewLayout& layout = train.front().layout;
  Scaler s;
  s.mean.resize(layout.num_views());
  s.scale.resize(layout.num_views());
  s.zero_variance.resize(layout.num_views());
  for (int k = 0; k < layout.num_views(); ++k) {
    const int d = layout.dim(k);
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(d);
    long n = 0;
    for (const CenterDataset& c : train) {
      if (!c.has_view(k)) continue;
      sum += c.view(k).colwise().sum().transpose();
      n += c.size();
    }
    if (n == 0) continue;
    const Eigen::VectorXd mean = sum / static_cast<double>(n);
    Eigen::VectorXd ss = Eigen::VectorXd::Zero(d);
    for (const CenterDataset& c : train) {
      if (!c.has_view(k)) continue;
      ss += (c.view(k).rowwise() - mean.transpose())
                .array().square().colwise().sum().matrix().transpose();
    }
    Eigen::VectorXd scale = (ss / static_cast<double>(n)).cwiseSqrt();
    const double view_scale = std::sqrt(scale.squaredNorm() / d);
    s.zero_variance[k].assign(d, false);
    for (int j = 0; j < d; ++j) {
      if (!(scale(j) > 1e-12 * std::max(1.0, std::abs(mean(j))))) {
        scale(j) = 1.0;
        s.zero_variance[k][j] = true;
      }
    }
    if (mode == ScaleMode::kPerView) {
      scale.setConstant(view_scale > 0.0 ? view_scale : 1.0);
    }
    s.mean[k] = mean;
    s.scale[k] = scale;
  }
  return s;
}

Scaler FitScaler(const CenterDataset& train, ScaleMode mode) {
  return FitScaler(std::span<const CenterDataset>(&train, 1), mode);
}

CenterDataset Scaler::Apply(const CenterDataset& data) const {
  CenterDataset out = data;
  for (int k : out.present_views()) {
    if (k >= static_cast<int>(mean.size()) || mean[k].size() == 0) {
      throw Error(ErrorCode::kShapeMismatch,
                  "scaler has no statistics for view '" + data.layout.name(k) + "'");
    }
    Eigen::MatrixXd& block = *out.views[k];
    block = ((block.rowwise() - mean[k].transpose()).array().rowwise() /
             scale[k].transpose().array())
                .matrix();
  }
  return out;
}

Eigen::MatrixXd Scaler::Invert(int k, const Eigen::MatrixXd& block) const {
  Eigen::MatrixXd out =
      (block.array().rowwise() * scale.at(k).transpose().array()).matrix();
  out.rowwise() += mean[k].transpose();
  return out;
}

std::vector<FoldFamily> KFold(const CenterDataset& data, int k, int repeats,
                              uint64_t seed) {
  if (k < 2) throw Error(ErrorCode::kInvalidArgument, "k must be >= 2");
  if (repeats < 1) throw Error(ErrorCode::kInvalidArgument, "repeats must be >= 1");
  std::array<std::vector<int>, 2> groups;
  for (int i = 0; i < data.size(); ++i) groups.at(data.groups[i]).push_back(i);
  for (int g = 0; g < 2; ++g) {
    if (!groups[g].empty() && static_cast<int>(groups[g].size()) < k) {
      throw Error(ErrorCode::kInsufficientGroupSamples,
                  std::string("group ") + GroupName(g) + " has fewer than " +
                      std::to_string(k) + " subjects");
    }
  }
  std::vector<FoldFamily> out;
  for (int r = 0; r < repeats; ++r) {
    Rng rng(DeriveSeed(seed, {static_cast<uint64_t>(r)}));
    FoldFamily family(k);
    int cursor = 0;
    for (std::vector<int> g : groups) {
      std::shuffle(g.begin(), g.end(), rng);
      for (int i : g) family[cursor++ % k].push_back(i);
    }
    for (std::vector<int>& f : family) std::sort(f.begin(), f.end());
    out.push_back(std::move(family));
  }
  return out;
}

std::vector<int> TrainIndices(const FoldFamily& family, int f) {
  std::vector<int> out;
  for (int j = 0; j < static_cast<int>(family.size()); ++j) {
    if (j != f) out.insert(out.end(), family[j].begin(), family[j].end());
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace fedppca
