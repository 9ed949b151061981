// Copyright 2026 The privflow Authors
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

#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace privflow::cli {

/// Exit codes of every subcommand.
enum ExitCode : int {
  kSuccess = 0,
  kDiagnostics = 1,  // findings at or above --fail-on, refused runs, incomplete metadata
  kUsage = 2,        // bad arguments or unreadable / malformed input
  kInternal = 3,
};

/// Runs `privflow <args...>` (args excludes the program name) writing to
/// `out` and `err`. `serve` blocks until SIGINT or SIGTERM.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace privflow::cli
