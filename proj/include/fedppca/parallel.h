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

#ifndef FEDPPCA_PARALLEL_H_
#define FEDPPCA_PARALLEL_H_

#include <functional>

namespace fedppca {

// Worker count: FEDPPCA_THREADS when set to a positive integer, otherwise the
// hardware concurrency (at least 1).
int DefaultWorkerCount();

// Runs fn(0..n-1) on up to `max_workers` threads (0 selects the default).
// Each index runs exactly once; if any call throws, the exception from the
// lowest failing index is rethrown after all workers finish.
void ParallelFor(int n, const std::function<void(int)>& fn, int max_workers = 0);

}  // namespace fedppca

#endif  // FEDPPCA_PARALLEL_H_
