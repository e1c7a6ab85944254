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

#include "plsnet/tensor.hpp"

#include <algorithm>
#include <cmath>

namespace plsnet {

std::string Shape4::str() const {
    return std::to_string(h) + "x" + std::to_string(w) + "x" + std::to_string(d) + "x" +
           std::to_string(c);
}

namespace {

void require_same_spatial(const Shape4& a, const Shape4& b, const char* op) {
    if (!a.same_spatial(b)) {
        throw ShapeError(std::string(op) + ": spatial shape mismatch " + a.str() + " vs " + b.str());
    }
}

}  // namespace

template <typename T>
BasicTensor4<T> concat_channels(const BasicTensor4<T>& a, const BasicTensor4<T>& b) {
    require_same_spatial(a.shape(), b.shape(), "concat_channels");
    const int ca = a.channels();
    const int cb = b.channels();
    BasicTensor4<T> out(a.shape().with_channels(ca + cb));
    const std::size_t voxels = a.shape().voxels();
    const T* pa = a.data().data();
    const T* pb = b.data().data();
    T* po = out.data().data();
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t v = 0; v < static_cast<std::ptrdiff_t>(voxels); ++v) {
        T* dst = po + v * (ca + cb);
        std::copy_n(pa + v * ca, ca, dst);
        std::copy_n(pb + v * cb, cb, dst + ca);
    }
    return out;
}

template <typename T>
BasicTensor4<T> slice_channels(const BasicTensor4<T>& x, int begin, int count) {
    if (begin < 0 || count < 0 || begin + count > x.channels()) {
        throw ShapeError("slice_channels: range [" + std::to_string(begin) + ", " +
                         std::to_string(begin + count) + ") outside " + x.shape().str());
    }
    const int c = x.channels();
    BasicTensor4<T> out(x.shape().with_channels(count));
    const std::size_t voxels = x.shape().voxels();
    const T* px = x.data().data();
    T* po = out.data().data();
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t v = 0; v < static_cast<std::ptrdiff_t>(voxels); ++v) {
        std::copy_n(px + v * c + begin, count, po + v * count);
    }
    return out;
}

template <typename T>
BasicTensor4<T> add_elementwise(const BasicTensor4<T>& a, const BasicTensor4<T>& b) {
    if (a.shape() != b.shape()) {
        throw ShapeError("add_elementwise: shape mismatch " + a.shape().str() + " vs " + b.shape().str());
    }
    BasicTensor4<T> out(a.shape());
    const auto pa = a.data();
    const auto pb = b.data();
    auto po = out.data();
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(po.size()); ++i) po[i] = pa[i] + pb[i];
    return out;
}

template <typename T>
void accumulate(BasicTensor4<T>& into, const BasicTensor4<T>& x) {
    if (into.shape() != x.shape()) {
        throw ShapeError("accumulate: shape mismatch " + into.shape().str() + " vs " + x.shape().str());
    }
    auto pi = into.data();
    const auto px = x.data();
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(pi.size()); ++i) pi[i] += px[i];
}

namespace {

// Copies the box of `src` starting at src_origin with extents `box` into dst at dst_origin.
template <typename T>
void copy_box(const BasicTensor4<T>& src, std::array<int, 3> src_origin, BasicTensor4<T>& dst,
              std::array<int, 3> dst_origin, std::array<int, 3> box) {
    const int c = src.channels();
#pragma omp parallel for schedule(static)
    for (int h = 0; h < box[0]; ++h) {
        for (int w = 0; w < box[1]; ++w) {
            const T* s = src.voxel(src_origin[0] + h, src_origin[1] + w, src_origin[2]);
            T* t = dst.voxel(dst_origin[0] + h, dst_origin[1] + w, dst_origin[2]);
            std::copy_n(s, static_cast<std::size_t>(box[2]) * c, t);
        }
    }
}

}  // namespace

template <typename T>
BasicTensor4<T> pad_zero(const BasicTensor4<T>& x, int pad) {
    if (pad < 0) throw std::invalid_argument("pad_zero: negative pad");
    const Shape4& s = x.shape();
    BasicTensor4<T> out(Shape4{s.h + 2 * pad, s.w + 2 * pad, s.d + 2 * pad, s.c});
    copy_box(x, {0, 0, 0}, out, {pad, pad, pad}, {s.h, s.w, s.d});
    return out;
}

template <typename T>
BasicTensor4<T> crop_center(const BasicTensor4<T>& x, int pad) {
    const Shape4& s = x.shape();
    if (pad < 0 || s.h <= 2 * pad || s.w <= 2 * pad || s.d <= 2 * pad) {
        throw ShapeError("crop_center: cannot remove " + std::to_string(pad) + " voxels per side from " +
                         s.str());
    }
    BasicTensor4<T> out(Shape4{s.h - 2 * pad, s.w - 2 * pad, s.d - 2 * pad, s.c});
    copy_box(x, {pad, pad, pad}, out, {0, 0, 0}, {out.shape().h, out.shape().w, out.shape().d});
    return out;
}

template <typename T>
BasicTensor4<T> pad_to(const BasicTensor4<T>& x, int h, int w, int d) {
    const Shape4& s = x.shape();
    if (h < s.h || w < s.w || d < s.d) {
        throw ShapeError("pad_to: target smaller than " + s.str());
    }
    BasicTensor4<T> out(Shape4{h, w, d, s.c});
    copy_box(x, {0, 0, 0}, out, {0, 0, 0}, {s.h, s.w, s.d});
    return out;
}

template <typename T>
BasicTensor4<T> crop_to(const BasicTensor4<T>& x, int h, int w, int d) {
    const Shape4& s = x.shape();
    if (h > s.h || w > s.w || d > s.d || h < 1 || w < 1 || d < 1) {
        throw ShapeError("crop_to: target outside " + s.str());
    }
    BasicTensor4<T> out(Shape4{h, w, d, s.c});
    copy_box(x, {0, 0, 0}, out, {0, 0, 0}, {h, w, d});
    return out;
}

template <typename T>
bool all_finite(const BasicTensor4<T>& x) {
    return std::all_of(x.data().begin(), x.data().end(), [](T v) { return std::isfinite(v); });
}

#define PLSNET_INSTANTIATE(T)                                                                  \
    template BasicTensor4<T> concat_channels(const BasicTensor4<T>&, const BasicTensor4<T>&); \
    template BasicTensor4<T> slice_channels(const BasicTensor4<T>&, int, int);                \
    template BasicTensor4<T> add_elementwise(const BasicTensor4<T>&, const BasicTensor4<T>&); \
    template void accumulate(BasicTensor4<T>&, const BasicTensor4<T>&);                       \
    template BasicTensor4<T> pad_zero(const BasicTensor4<T>&, int);                            \
    template BasicTensor4<T> crop_center(const BasicTensor4<T>&, int);                         \
    template BasicTensor4<T> pad_to(const BasicTensor4<T>&, int, int, int);                    \
    template BasicTensor4<T> crop_to(const BasicTensor4<T>&, int, int, int);                   \
    template bool all_finite(const BasicTensor4<T>&);

PLSNET_INSTANTIATE(float)
PLSNET_INSTANTIATE(double)

#undef PLSNET_INSTANTIATE

}  // namespace plsnet
