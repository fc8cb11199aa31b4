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

#ifndef FEDPPCA_TOOLS_CLI_H_
#define FEDPPCA_TOOLS_CLI_H_

#include <iosfwd>
#include <string>
#include <vector>

#include "fedppca/error.h"

namespace fedppca::cli {

// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitNumerical = 4;

int ExitCodeFor(ErrorCode code);

// Entry point shared by the binary and the tests. `args` excludes the
// program name.
int Run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);

}  // namespace fedppca::cli

#endif  // FEDPPCA_TOOLS_CLI_H_
