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
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace plsnet {

struct Extents3 {
    int h = 1;
    int w = 1;
    int d = 1;

    std::size_t voxels() const {
        return static_cast<std::size_t>(h) * static_cast<std::size_t>(w) * static_cast<std::size_t>(d);
    }
    std::string str() const { return std::to_string(h) + "x" + std::to_string(w) + "x" + std::to_string(d); }
    friend bool operator==(const Extents3&, const Extents3&) = default;
};

/// Label legend. 0 is background; 1..5 are the lobes in reporting order.
enum Lobe : std::uint16_t {
    kBackground = 0,
    kRightUpper = 1,
    kRightMiddle = 2,
    kRightLower = 3,
    kLeftUpper = 4,
    kLeftLower = 5,
};

inline constexpr int kLobeCount = 5;
inline constexpr int kLobeClasses = kLobeCount + 1;

/// "RUL", "RML", ... for 1..5, "BG" for 0.
std::string_view lobe_name(int label);

/// Integer label grid with physical voxel spacing (mm per axis).
/// Voxel order matches BasicTensor4 with one channel: (h * W + w) * D + d.
struct LabeledVolume {
    Extents3 dims;
    std::array<double, 3> spacing{1.0, 1.0, 1.0};
    std::vector<std::uint16_t> labels;

    LabeledVolume() = default;
    LabeledVolume(Extents3 extents, std::array<double, 3> mm, std::uint16_t fill = 0)
        : dims(extents), spacing(mm), labels(extents.voxels(), fill) {}

    std::size_t index(int h, int w, int d) const {
        return (static_cast<std::size_t>(h) * dims.w + static_cast<std::size_t>(w)) * dims.d +
               static_cast<std::size_t>(d);
    }
    std::uint16_t& at(int h, int w, int d) { return labels[index(h, w, d)]; }
    std::uint16_t at(int h, int w, int d) const { return labels[index(h, w, d)]; }

    /// Throws std::invalid_argument on bad extents/spacing or labels >= classes.
    void validate(int classes = kLobeClasses) const;
};

}  // namespace plsnet
