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

#include "fedppca/dataset.h"

#include <string>

#include "fedppca/error.h"

namespace fedppca {

const char* GroupName(int group) { return group == kGroup1 ? "g1" : "g2"; }

const Eigen::MatrixXd& CenterDataset::view(int k) const {
  if (!has_view(k)) {
    throw Error(ErrorCode::kNoObservedView,
                "view " + std::to_string(k) + " absent from dataset");
  }
  return *views[k];
}

std::vector<int> CenterDataset::present_views() const {
  std::vector<int> out;
  for (int k = 0; k < static_cast<int>(views.size()); ++k) {
    if (views[k]) out.push_back(k);
  }
  return out;
}

Record CenterDataset::record(int n) const {
  Record r(views.size());
  for (int k = 0; k < static_cast<int>(views.size()); ++k) {
    if (views[k]) r[k] = views[k]->row(n).transpose();
  }
  return r;
}

CenterDataset CenterDataset::Subset(std::span<const int> indices) const {
  CenterDataset out(layout);
  out.ids.reserve(indices.size());
  out.groups.reserve(indices.size());
  for (int i : indices) {
    out.ids.push_back(ids.at(i));
    out.groups.push_back(groups.at(i));
  }
  for (int k = 0; k < static_cast<int>(views.size()); ++k) {
    if (!views[k]) continue;
    Eigen::MatrixXd block(static_cast<Eigen::Index>(indices.size()),
                          layout.dim(k));
    for (size_t r = 0; r < indices.size(); ++r) {
      block.row(static_cast<Eigen::Index>(r)) = views[k]->row(indices[r]);
    }
    out.views[k] = std::move(block);
  }
  return out;
}

void CenterDataset::RemoveView(int k) { views.at(k).reset(); }

void CenterDataset::Validate() const {
  if (static_cast<int>(views.size()) != layout.num_views()) {
    throw Error(ErrorCode::kLayoutMismatch, "dataset view count");
  }
  if (groups.size() != ids.size()) {
    throw Error(ErrorCode::kShapeMismatch, "ids and groups differ in length");
  }
  for (int g : groups) {
    if (g != kGroup1 && g != kGroup2) {
      throw Error(ErrorCode::kInvalidData, "group label outside {g1, g2}");
    }
  }
  for (int k : present_views()) {
    const Eigen::MatrixXd& m = *views[k];
    if (m.rows() != size() || m.cols() != layout.dim(k)) {
      throw Error(ErrorCode::kShapeMismatch,
                  "view '" + layout.name(k) + "' block shape");
    }
    if (!m.allFinite()) {
      throw Error(ErrorCode::kInvalidData,
                  "non-finite value in view '" + layout.name(k) + "'");
    }
  }
}

bool CenterDataset::operator==(const CenterDataset& other) const {
  if (!(layout == other.layout) || ids != other.ids || groups != other.groups ||
      views.size() != other.views.size()) {
    return false;
  }
  for (size_t k = 0; k < views.size(); ++k) {
    if (views[k].has_value() != other.views[k].has_value()) return false;
    if (views[k] && *views[k] != *other.views[k]) return false;
  }
  return true;
}

CenterDataset Concatenate(std::span<const CenterDataset> parts) {
  if (parts.empty()) return CenterDataset();
  CenterDataset out(parts.front().layout);
  int total = 0;
  for (const CenterDataset& p : parts) {
    if (!(p.layout == out.layout) ||
        p.present_views() != parts.front().present_views()) {
      throw Error(ErrorCode::kLayoutMismatch,
                  "cannot concatenate datasets with different views");
    }
    total += p.size();
    out.ids.insert(out.ids.end(), p.ids.begin(), p.ids.end());
    out.groups.insert(out.groups.end(), p.groups.begin(), p.groups.end());
  }
  for (int k : parts.front().present_views()) {
    Eigen::MatrixXd block(total, out.layout.dim(k));
    int row = 0;
    for (const CenterDataset& p : parts) {
      block.middleRows(row, p.size()) = p.view(k);
      row += p.size();
    }
    out.views[k] = std::move(block);
  }
  return out;
}

}  // namespace fedppca
