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

#ifndef FEDPPCA_LAYOUT_H_
#define FEDPPCA_LAYOUT_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace fedppca {

struct ViewSpec {
  std::string name;
  int dim = 0;

  bool operator==(const ViewSpec&) const = default;
};

// Ordered set of views shared by every center and the master. View indices
// used throughout the library refer to positions in this list.
class ViewLayout {
 public:
  ViewLayout() = default;
  // Throws kInvalidArgument on duplicate names, empty names or dims < 1.
  explicit ViewLayout(std::vector<ViewSpec> views);

  int num_views() const { return static_cast<int>(views_.size()); }
  int dim(int k) const { return views_.at(k).dim; }
  const std::string& name(int k) const { return views_.at(k).name; }
  int total_dim() const { return total_dim_; }
  const std::vector<ViewSpec>& views() const { return views_; }
  std::optional<int> index_of(const std::string& name) const;
  int min_dim() const;

  // FNV-1a over names and dims; stamped into every serialized message.
  uint64_t digest() const;

  bool operator==(const ViewLayout& other) const {
    return views_ == other.views_;
  }

 private:
  std::vector<ViewSpec> views_;
  int total_dim_ = 0;
};

}  // namespace fedppca

#endif  // FEDPPCA_LAYOUT_H_
