// Copyright 2026 The AOTK Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef AOTK_TOOLS_CLI_H_
#define AOTK_TOOLS_CLI_H_

#include <ostream>

namespace aotk::cli {

// Entry point of the `aotk` tool; returns the process exit code
// (0 ok, 2 config/usage, 3 data, 4 backend, 5 remote).
int RunCli(int argc, const char* const* argv, std::ostream& out,
           std::ostream& err);

}  // namespace aotk::cli

#endif  // AOTK_TOOLS_CLI_H_
