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
#include <stdexcept>
#include <string>

#include "plsnet/labels.hpp"
#include "plsnet/tensor.hpp"

namespace plsnet {

inline constexpr int kVolumeFormatVersion = 1;

enum class VolumeKind { kIntensity, kLabel };

struct VolumeHeader {
    int format_version = kVolumeFormatVersion;
    Extents3 dims;
    std::array<double, 3> spacing{1.0, 1.0, 1.0};
    VolumeKind kind = VolumeKind::kIntensity;
    std::string body;  // file name of the raw body, relative to the header
};

/// Malformed header, unknown version, wrong kind or body size mismatch.
class VolumeFormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Single-channel intensity grid with physical spacing.
struct ImageVolume {
    Tensor4 image;
    std::array<double, 3> spacing{1.0, 1.0, 1.0};

    Extents3 dims() const { return {image.shape().h, image.shape().w, image.shape().d}; }
};

/// `path` names the JSON header; the body goes next to it with a .raw
/// extension. Layout in docs/FORMATS.md.
void save_volume(const std::string& path, const ImageVolume& v);
void save_volume(const std::string& path, const LabeledVolume& v);

VolumeHeader read_volume_header(const std::string& path);
ImageVolume load_image(const std::string& path);
LabeledVolume load_labels(const std::string& path);

}  // namespace plsnet
