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

#ifndef FEDPPCA_TRANSPORT_H_
#define FEDPPCA_TRANSPORT_H_

#include <set>
#include <string>
#include <utility>
#include <vector>

#include "fedppca/serialize.h"

namespace fedppca {

struct Message {
  int center = 0;
  Bytes payload;
};

enum class DropoutPolicy {
  kAbort,  // a dropped client aborts the run with kClientDropped
  kSkip,   // the master aggregates over the surviving centers
};

struct DropoutPlan {
  // (round, center index) pairs whose uplink message is lost.
  std::set<std::pair<int, int>> dropped;
  DropoutPolicy policy = DropoutPolicy::kSkip;
};

// Synchronous in-process channel. Every round is a barrier: the master sees
// all surviving client messages, ordered by center index, before it
// aggregates, and every client sees the new global message before the next
// round starts.
class InProcessTransport {
 public:
  explicit InProcessTransport(DropoutPlan plan = {}) : plan_(std::move(plan)) {}

  // Uplink: returns the messages delivered to the master.
  std::vector<Message> Exchange(int round, std::vector<Message> messages);
  // Downlink: every client receives the same bytes.
  void Broadcast(int round, Bytes global);
  const Bytes& LatestGlobal() const { return global_; }
  int latest_round() const { return global_round_; }

  // Centers dropped so far, as (round, center).
  const std::vector<std::pair<int, int>>& drops() const { return drops_; }

 private:
  DropoutPlan plan_;
  Bytes global_;
  int global_round_ = 0;
  std::vector<std::pair<int, int>> drops_;
};

}  // namespace fedppca

#endif  // FEDPPCA_TRANSPORT_H_
