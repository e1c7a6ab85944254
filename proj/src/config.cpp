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

#include "plsnet/config.hpp"

#include <fstream>
#include <set>
#include <stdexcept>

namespace plsnet {

int NetworkConfig::level_width(int level) const {
    if (level == 0) return stem_channels;
    if (level < 1 || level > 3) throw std::out_of_range("level must be in [0, 3]");
    return level_channels[level - 1] + (input_reinforcement ? 1 : 0);
}

void NetworkConfig::validate() const {
    auto fail = [](const std::string& msg) { throw std::invalid_argument("network config: " + msg); };
    if (classes < 2) fail("classes must be >= 2");
    if (growth_rate < 1) fail("growth_rate must be >= 1");
    if (stem_channels < 1) fail("stem_channels must be >= 1");
    for (int c : level_channels) {
        if (c < 1) fail("level_channels entries must be >= 1");
    }
    for (int b : blocks_per_level) {
        if (b < 0) fail("blocks_per_level entries must be >= 0");
    }
    for (int r : dilations) {
        if (r < 1) fail("dilations must be >= 1");
    }
}

void to_json(nlohmann::json& j, const NetworkConfig& cfg) {
    j = nlohmann::json{{"classes", cfg.classes},
                       {"growth_rate", cfg.growth_rate},
                       {"stem_channels", cfg.stem_channels},
                       {"level_channels", cfg.level_channels},
                       {"blocks_per_level", cfg.blocks_per_level},
                       {"dilations", cfg.dilations},
                       {"input_reinforcement", cfg.input_reinforcement},
                       {"depthwise_separable", cfg.depthwise_separable},
                       {"dense_blocks", cfg.dense_blocks}};
}

void from_json(const nlohmann::json& j, NetworkConfig& cfg) {
    if (!j.is_object()) throw std::invalid_argument("network config: expected a JSON object");
    static const std::set<std::string> known{"classes",          "growth_rate", "stem_channels",
                                             "level_channels",   "blocks_per_level", "dilations",
                                             "input_reinforcement", "depthwise_separable", "dense_blocks"};
    for (const auto& [key, value] : j.items()) {
        if (!known.count(key)) throw std::invalid_argument("network config: unknown key '" + key + "'");
    }
    NetworkConfig out;
    auto get = [&](const char* key, auto& field) {
        if (j.contains(key)) j.at(key).get_to(field);
    };
    get("classes", out.classes);
    get("growth_rate", out.growth_rate);
    get("stem_channels", out.stem_channels);
    get("level_channels", out.level_channels);
    get("blocks_per_level", out.blocks_per_level);
    get("dilations", out.dilations);
    get("input_reinforcement", out.input_reinforcement);
    get("depthwise_separable", out.depthwise_separable);
    get("dense_blocks", out.dense_blocks);
    out.validate();
    cfg = out;
}

NetworkConfig load_network_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open network config '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument("network config '" + path + "': " + e.what());
    }
    try {
        return j.get<NetworkConfig>();
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument("network config '" + path + "': " + e.what());
    }
}

}  // namespace plsnet
