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

#include "json.hpp"
#include "plsnet/labels.hpp"
#include "plsnet/volume.hpp"

namespace plsnet {

/// Plane n . u = offset in the lung's normalised ellipsoid coordinates
/// u = (p - centre) / semi_axes, so the lung is the unit ball.
struct PhantomPlane {
    std::array<double, 3> normal{1.0, 0.0, 0.0};
    double offset = 0.0;
};

/// Axes are (h, w, d) = (superior to inferior, patient right to left,
/// anterior to posterior). Centres and semi-axes are fractions of the grid.
struct PhantomSpec {
    Extents3 dims{64, 64, 64};
    std::array<double, 3> spacing{1.0, 1.0, 1.0};
    std::uint64_t seed = 1;

    std::array<double, 3> right_center{0.5, 0.29, 0.5};
    std::array<double, 3> right_axes{0.42, 0.2, 0.38};
    std::array<double, 3> left_center{0.5, 0.71, 0.5};
    std::array<double, 3> left_axes{0.42, 0.18, 0.38};

    // Positive side of the oblique planes is the lower lobe. In the right
    // lung the horizontal plane splits the rest: negative side upper, positive middle.
    PhantomPlane right_oblique{{0.6, 0.0, 0.8}, 0.0};
    PhantomPlane right_horizontal{{1.0, 0.0, 0.0}, -0.15};
    PhantomPlane left_oblique{{0.6, 0.0, 0.8}, 0.05};

    std::array<double, 5> lobe_means{0.30, 0.45, 0.60, 0.38, 0.52};  // RUL, RML, RLL, LUL, LLL
    double background_mean = 1.0;
    double fissure_mean = 0.0;
    double noise_sigma = 0.04;
    /// Fraction of fissure voxels reset to the lobe intensity (anterior first).
    double fissure_gap = 0.0;
    /// Seeded uniform perturbation of centres, axes and plane offsets, +- this fraction.
    double jitter = 0.0;

    /// Throws std::invalid_argument.
    void validate() const;
};

void to_json(nlohmann::json& j, const PhantomSpec& s);
/// Missing keys keep their defaults; unknown keys are rejected.
void from_json(const nlohmann::json& j, PhantomSpec& s);
PhantomSpec load_phantom_spec(const std::string& path);

struct Phantom {
    ImageVolume image;
    LabeledVolume labels;
};

/// Throws std::invalid_argument if any of the five lobes comes out empty.
Phantom generate_phantom(const PhantomSpec& spec);

}  // namespace plsnet
