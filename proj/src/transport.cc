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

#include "fedppca/transport.h"

#include <algorithm>

#include "fedppca/error.h"

namespace fedppca {

std::vector<Message> InProcessTransport::Exchange(int round,
                                                  std::vector<Message> messages) {
  std::sort(messages.begin(), messages.end(),
            [](const Message& a, const Message& b) { return a.center < b.center; });
  std::vector<Message> delivered;
  for (Message& m : messages) {
    if (plan_.dropped.count({round, m.center}) == 0) {
      delivered.push_back(std::move(m));
      continue;
    }
    drops_.emplace_back(round, m.center);
    if (plan_.policy == DropoutPolicy::kAbort) {
      throw Error(ErrorCode::kClientDropped,
                  "center " + std::to_string(m.center) + " dropped in round " +
                      std::to_string(round));
    }
  }
  return delivered;
}

void InProcessTransport::Broadcast(int round, Bytes global) {
  global_ = std::move(global);
  global_round_ = round;
}

}  // namespace fedppca
