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

#include "fedppca/layout.h"

#include <algorithm>
#include <set>
#include <utility>

#include "fedppca/error.h"
#include "fedppca/hash.h"

namespace fedppca {

ViewLayout::ViewLayout(std::vector<ViewSpec> views) : views_(std::move(views)) {
  std::set<std::string> seen;
  for (const ViewSpec& v : views_) {
    if (v.name.empty()) {
      throw Error(ErrorCode::kInvalidArgument, "empty view name");
    }
    if (v.dim < 1) {
      throw Error(ErrorCode::kInvalidArgument,
                  "view '" + v.name + "' has dimension < 1");
    }
    if (!seen.insert(v.name).second) {
      throw Error(ErrorCode::kInvalidArgument,
                  "duplicate view name '" + v.name + "'");
    }
    total_dim_ += v.dim;
  }
}

std::optional<int> ViewLayout::index_of(const std::string& name) const {
  for (int k = 0; k < num_views(); ++k) {
    if (views_[k].name == name) return k;
  }
  return std::nullopt;
}

int ViewLayout::min_dim() const {
  int m = 0;
  for (const ViewSpec& v : views_) m = (m == 0) ? v.dim : std::min(m, v.dim);
  return m;
}

uint64_t ViewLayout::digest() const {
  Fnv1a64 h;
  h.AddU32(static_cast<uint32_t>(views_.size()));
  for (const ViewSpec& v : views_) {
    h.AddU32(static_cast<uint32_t>(v.name.size()));
    h.AddBytes(v.name.data(), v.name.size());
    h.AddU32(static_cast<uint32_t>(v.dim));
  }
  return h.value();
}

}  // namespace fedppca
