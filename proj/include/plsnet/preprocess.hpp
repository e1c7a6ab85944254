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

#include "plsnet/labels.hpp"
#include "plsnet/volume.hpp"

namespace plsnet {

/// round(dim * spacing / target) per axis, at least 1.
Extents3 isotropic_extents(const Extents3& dims, const std::array<double, 3>& spacing, double target_mm = 1.0);

/// Trilinear for intensities.
ImageVolume resample_isotropic(const ImageVolume& v, double target_mm = 1.0);
/// Nearest neighbour for labels.
LabeledVolume resample_isotropic(const LabeledVolume& v, double target_mm = 1.0);

/// Nearest-neighbour label resampling onto an arbitrary grid:
/// src = floor((i + 0.5) * in / out).
LabeledVolume resample_labels(const LabeledVolume& v, const Extents3& dims, const std::array<double, 3>& spacing);
LabeledVolume resample_labels_to_native(const LabeledVolume& iso, const VolumeHeader& native);

/// Zero mean, unit variance over all voxels; constant input gives zeros.
ImageVolume znormalize(const ImageVolume& v);

/// resample_isotropic then znormalize. Used by training and inference alike.
ImageVolume preprocess(const ImageVolume& v);

/// Per-voxel argmax over channels; ties go to the lowest index.
LabeledVolume argmax_labels(const Tensor4& prob, const std::array<double, 3>& spacing = {1.0, 1.0, 1.0});

}  // namespace plsnet
