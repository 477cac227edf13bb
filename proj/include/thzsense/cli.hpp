// SPDX-License-Identifier: Apache-2.0
//
// thzsense: terahertz monostatic sensing channel toolkit
// Copyright (C) 2026 The thzsense authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef THZSENSE_CLI_HPP
#define THZSENSE_CLI_HPP

#include <ostream>
#include <string>
#include <vector>

namespace thz::cli
{

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitNumerical = 3;

// Runs one subcommand. args excludes the program name. Output reaches out
// only when the command succeeds; diagnostics go to err.
int run_command(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

} // namespace thz::cli

#endif
