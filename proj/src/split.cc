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
#include <random>

#include "fedppca/data.h"
#include "fedppca/error.h"
#include "fedppca/random.h"

namespace fedppca {
namespace {

std::array<std::vector<int>, 2> ShuffledGroups(const CenterDataset& data,
                                               Rng& rng) {
  std::array<std::vector<int>, 2> out;
  for (int i = 0; i < data.size(); ++i) out[data.groups[i]].push_back(i);
  for (std::vector<int>& g : out) std::shuffle(g.begin(), g.end(), rng);
  return out;
}

// Deals `subjects` round-robin over `targets`, starting at *cursor.
void Deal(std::span<const int> subjects, std::span<const int> targets,
          int* cursor, std::vector<std::vector<int>>& members) {
  for (int s : subjects) {
    members[targets[*cursor % targets.size()]].push_back(s);
    ++*cursor;
  }
}

std::vector<int> Range(int begin, int end) {
  std::vector<int> out;
  for (int i = begin; i < end; ++i) out.push_back(i);
  return out;
}

}  // namespace

std::string ScenarioName(Scenario scenario) {
  switch (scenario) {
    case Scenario::kIid: return "IID";
    case Scenario::kG: return "G";
    case Scenario::kK: return "K";
    case Scenario::kGK: return "GK";
  }
  return "unknown";
}

Scenario ParseScenario(const std::string& name) {
  if (name == "IID") return Scenario::kIid;
  if (name == "G") return Scenario::kG;
  if (name == "K") return Scenario::kK;
  if (name == "GK" || name == "G/K") return Scenario::kGK;
  throw Error(ErrorCode::kInvalidArgument, "unknown scenario '" + name + "'");
}

std::vector<CenterDataset> SplitScenario(const CenterDataset& data,
                                         Scenario scenario, int num_centers,
                                         uint64_t seed) {
  data.Validate();
  const bool thirds = scenario != Scenario::kIid;
  if (num_centers < 1 || (thirds && num_centers % 3 != 0)) {
    throw Error(ErrorCode::kBadCenterCount,
                ScenarioName(scenario) + " needs " +
                    (thirds ? "a multiple of 3" : "at least 1") + " centers, got " +
                    std::to_string(num_centers));
  }
  const bool drop_views = scenario == Scenario::kK || scenario == Scenario::kGK;
  if (drop_views && data.layout.num_views() < 3) {
    throw Error(ErrorCode::kInvalidArgument,
                ScenarioName(scenario) + " needs at least 3 views");
  }
  Rng rng(seed);
  const std::array<std::vector<int>, 2> groups = ShuffledGroups(data, rng);
  std::vector<std::vector<int>> members(num_centers);

  if (scenario == Scenario::kIid || scenario == Scenario::kK) {
    const std::vector<int> all = Range(0, num_centers);
    int cursor = 0;
    for (const std::vector<int>& g : groups) Deal(g, all, &cursor, members);
  } else {
    const int third = num_centers / 3;
    const std::vector<int> mixed = Range(0, third);
    const std::array<std::vector<int>, 2> single = {Range(third, 2 * third),
                                                    Range(2 * third, num_centers)};
    int mixed_cursor = 0;
    for (int g = 0; g < 2; ++g) {
      const std::span<const int> all(groups[g]);
      const size_t half = (all.size() + 1) / 2;
      Deal(all.first(half), mixed, &mixed_cursor, members);
      int cursor = 0;
      Deal(all.subspan(half), single[g], &cursor, members);
    }
  }

  std::vector<CenterDataset> out;
  for (int c = 0; c < num_centers; ++c) {
    if (members[c].empty()) {
      throw Error(ErrorCode::kInsufficientGroupSamples,
                  "center " + std::to_string(c) + " of " + ScenarioName(scenario) +
                      " receives no subjects");
    }
    std::sort(members[c].begin(), members[c].end());
    out.push_back(data.Subset(members[c]));
  }
  if (drop_views) {
    const int third = num_centers / 3;
    for (int c = third; c < 2 * third; ++c) out[c].RemoveView(1);
    for (int c = 2 * third; c < num_centers; ++c) out[c].RemoveView(2);
  }
  return out;
}

}  // namespace fedppca
