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

#include "plsnet/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "plsnet/ops.hpp"

namespace plsnet {

namespace {

int nearest_source(int i, int in, int out) {
    const auto s = static_cast<long long>(2 * i + 1) * in / (2LL * out);
    return static_cast<int>(std::min<long long>(s, in - 1));
}

}  // namespace

Extents3 isotropic_extents(const Extents3& dims, const std::array<double, 3>& spacing, double target_mm) {
    if (!(target_mm > 0.0)) throw std::invalid_argument("target spacing must be positive");
    auto one = [&](int n, double s) {
        if (!(s > 0.0)) throw std::invalid_argument("spacing must be positive");
        return std::max(1, static_cast<int>(std::lround(n * s / target_mm)));
    };
    return {one(dims.h, spacing[0]), one(dims.w, spacing[1]), one(dims.d, spacing[2])};
}

ImageVolume resample_isotropic(const ImageVolume& v, double target_mm) {
    const Extents3 e = isotropic_extents(v.dims(), v.spacing, target_mm);
    return {trilinear_resample(v.image, e.h, e.w, e.d), {target_mm, target_mm, target_mm}};
}

LabeledVolume resample_isotropic(const LabeledVolume& v, double target_mm) {
    return resample_labels(v, isotropic_extents(v.dims, v.spacing, target_mm), {target_mm, target_mm, target_mm});
}

LabeledVolume resample_labels(const LabeledVolume& v, const Extents3& dims, const std::array<double, 3>& spacing) {
    if (dims.h < 1 || dims.w < 1 || dims.d < 1) throw std::invalid_argument("target extents must be >= 1");
    LabeledVolume out(dims, spacing);
    std::vector<int> sh(dims.h), sw(dims.w), sd(dims.d);
    for (int i = 0; i < dims.h; ++i) sh[i] = nearest_source(i, v.dims.h, dims.h);
    for (int i = 0; i < dims.w; ++i) sw[i] = nearest_source(i, v.dims.w, dims.w);
    for (int i = 0; i < dims.d; ++i) sd[i] = nearest_source(i, v.dims.d, dims.d);
#pragma omp parallel for schedule(static)
    for (int h = 0; h < dims.h; ++h) {
        for (int w = 0; w < dims.w; ++w) {
            for (int d = 0; d < dims.d; ++d) out.at(h, w, d) = v.at(sh[h], sw[w], sd[d]);
        }
    }
    return out;
}

LabeledVolume resample_labels_to_native(const LabeledVolume& iso, const VolumeHeader& native) {
    return resample_labels(iso, native.dims, native.spacing);
}

ImageVolume znormalize(const ImageVolume& v) {
    const auto& x = v.image.values();
    if (x.empty()) return v;
    double sum = 0.0;
    for (float f : x) sum += f;
    const double mean = sum / static_cast<double>(x.size());
    double sq = 0.0;
    for (float f : x) sq += (f - mean) * (f - mean);
    const double sd = std::sqrt(sq / static_cast<double>(x.size()));
    ImageVolume out{Tensor4(v.image.shape()), v.spacing};
    if (!(sd > 1e-12 * std::max(1.0, std::abs(mean)))) return out;
    auto& y = out.image.values();
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = static_cast<float>((x[i] - mean) / sd);
    return out;
}

ImageVolume preprocess(const ImageVolume& v) { return znormalize(resample_isotropic(v)); }

LabeledVolume argmax_labels(const Tensor4& prob, const std::array<double, 3>& spacing) {
    const Shape4& s = prob.shape();
    if (s.c < 1) throw ShapeError("argmax_labels: probability tensor has no channels");
    LabeledVolume out({s.h, s.w, s.d}, spacing);
    const std::size_t n = s.voxels();
    const float* p = prob.values().data();
#pragma omp parallel for schedule(static)
    for (std::size_t i = 0; i < n; ++i) {
        const float* v = p + i * static_cast<std::size_t>(s.c);
        int best = 0;
        for (int c = 1; c < s.c; ++c) {
            if (v[c] > v[best]) best = c;
        }
        out.labels[i] = static_cast<std::uint16_t>(best);
    }
    return out;
}

}  // namespace plsnet
