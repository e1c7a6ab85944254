/*******************************************************************************
* Copyright 2026 The plsnet Authors
*
* Licensed under the Apache License, Version 2.0 (the "License");
* you may not use this file except in compliance with the License.
* You may obtain a copy of the License at
*
*     http://www.apache.org/licenses/LICENSE-2.0
*
* Unless required by applicable law or agreed to in writing, software
* distributed under the License is distributed on an "AS IS" BASIS,
* WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
* See the License for the specific language governing permissions and
* limitations under the License.
*******************************************************************************/

#pragma once

#include <ostream>
#include <string>
#include <utility>
#include <vector>

namespace plsnet {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

/// Entry point of the `plsnet` tool: analyze, phantom, train, infer,
/// evaluate, inspect. Returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// One "image.json labels.json [ignored columns...]" pair per line; '#'
/// starts a comment. Paths are resolved against the list's directory.
std::vector<std::pair<std::string, std::string>> read_volume_list(const std::string& path);

}  // namespace plsnet
