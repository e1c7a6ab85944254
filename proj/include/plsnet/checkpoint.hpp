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

#include <cstdint>
#include <stdexcept>
#include <string>

#include "plsnet/config.hpp"
#include "plsnet/params.hpp"

namespace plsnet {

inline constexpr char kCheckpointMagic[8] = {'P', 'L', 'S', 'N', 'C', 'K', 'P', 'T'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

/// Bad magic, unknown version, truncation, or tensors that do not match the
/// embedded config.
class CheckpointError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Checkpoint {
    NetworkConfig config;
    ParamStore<float> params;
};

/// Layout is documented in docs/FORMATS.md. Throws std::invalid_argument
/// when `params` does not have the layout `cfg` builds.
void save_checkpoint(const std::string& path, const NetworkConfig& cfg, const ParamStore<float>& params);
/// Verifies that names, roles and shapes match the layout `config` builds.
Checkpoint load_checkpoint(const std::string& path);

}  // namespace plsnet
