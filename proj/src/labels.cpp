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

#include "plsnet/labels.hpp"

#include <stdexcept>

namespace plsnet {

std::string_view lobe_name(int label) {
    switch (label) {
        case kBackground: return "BG";
        case kRightUpper: return "RUL";
        case kRightMiddle: return "RML";
        case kRightLower: return "RLL";
        case kLeftUpper: return "LUL";
        case kLeftLower: return "LLL";
        default: return "?";
    }
}

void LabeledVolume::validate(int classes) const {
    if (dims.h < 1 || dims.w < 1 || dims.d < 1) {
        throw std::invalid_argument("label volume: extents must be >= 1, got " + dims.str());
    }
    for (double s : spacing) {
        if (!(s > 0.0)) throw std::invalid_argument("label volume: spacing must be positive");
    }
    if (labels.size() != dims.voxels()) {
        throw std::invalid_argument("label volume: " + std::to_string(labels.size()) + " labels for grid " +
                                    dims.str());
    }
    for (std::uint16_t l : labels) {
        if (l >= classes) {
            throw std::invalid_argument("label volume: label " + std::to_string(l) + " outside legend [0, " +
                                        std::to_string(classes) + ")");
        }
    }
}

}  // namespace plsnet
