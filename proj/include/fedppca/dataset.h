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

#ifndef FEDPPCA_DATASET_H_
#define FEDPPCA_DATASET_H_

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fedppca/layout.h"

namespace fedppca {

// One subject's multi-view observation, indexed by layout view. Missing
// views are empty.
using Record = std::vector<std::optional<Eigen::VectorXd>>;

// Two-label group set: 0 is "g1", 1 is "g2".
inline constexpr int kGroup1 = 0;
inline constexpr int kGroup2 = 1;
const char* GroupName(int group);

// A center's local data. A view is either observed for every subject of the
// center or for none, so each present view is stored as an N x d_k block.
struct CenterDataset {
  ViewLayout layout;
  std::vector<std::string> ids;
  std::vector<int> groups;
  std::vector<std::optional<Eigen::MatrixXd>> views;

  CenterDataset() = default;
  explicit CenterDataset(ViewLayout l)
      : layout(std::move(l)), views(layout.num_views()) {}

  int size() const { return static_cast<int>(ids.size()); }
  bool has_view(int k) const {
    return k >= 0 && k < static_cast<int>(views.size()) && views[k].has_value();
  }
  const Eigen::MatrixXd& view(int k) const;
  std::vector<int> present_views() const;

  Record record(int n) const;
  CenterDataset Subset(std::span<const int> indices) const;
  // Drops view k for every subject.
  void RemoveView(int k);

  // Throws on ragged shapes, bad group labels or non-finite values.
  void Validate() const;

  bool operator==(const CenterDataset& other) const;
};

// Concatenates subjects of datasets sharing a layout and present views.
CenterDataset Concatenate(std::span<const CenterDataset> parts);

}  // namespace fedppca

#endif  // FEDPPCA_DATASET_H_
