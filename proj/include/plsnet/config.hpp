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

#include <array>
#include <string>

#include "json.hpp"

namespace plsnet {

/// Structural description of the segmentation network.
///
/// Level 0 runs at input resolution (one separable stem convolution). Levels
/// 1..3 each start with a stride-2 convolution producing level_channels[l-1]
/// maps; with input reinforcement the input, downsampled to that level, is
/// appended as one more channel. blocks_per_level[l-1] dense blocks follow.
struct NetworkConfig {
    int classes = 6;
    int growth_rate = 12;
    int stem_channels = 8;
    std::array<int, 3> level_channels{16, 48, 132};
    std::array<int, 3> blocks_per_level{1, 2, 4};
    std::array<int, 4> dilations{1, 2, 3, 4};
    bool input_reinforcement = true;
    bool depthwise_separable = true;
    /// false swaps every dense block for a plain stack of four 3x3x3
    /// convolutions (no dense links, no residual, dilation 1).
    bool dense_blocks = true;

    /// Channels of the level-l feature maps that enter the blocks and the decoder.
    int level_width(int level) const;
    int decoder_width() const { return 2 * classes; }

    /// Throws std::invalid_argument naming the offending field.
    void validate() const;

    friend bool operator==(const NetworkConfig&, const NetworkConfig&) = default;
};

void to_json(nlohmann::json& j, const NetworkConfig& cfg);
/// Missing keys keep their defaults; unknown keys are rejected.
void from_json(const nlohmann::json& j, NetworkConfig& cfg);

NetworkConfig load_network_config(const std::string& path);

}  // namespace plsnet
