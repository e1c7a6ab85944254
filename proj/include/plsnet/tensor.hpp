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
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace plsnet {

/// Raised whenever two tensors (or a tensor and a kernel) disagree on extents.
class ShapeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Extents of a feature map: height x width x depth x channels.
///
/// Spatial extents are always >= 1. The channel axis may be empty (c == 0),
/// which makes concatenation with an empty tensor the identity.
struct Shape4 {
    int h = 1;
    int w = 1;
    int d = 1;
    int c = 1;

    std::size_t voxels() const {
        return static_cast<std::size_t>(h) * static_cast<std::size_t>(w) *
               static_cast<std::size_t>(d);
    }
    std::size_t size() const { return voxels() * static_cast<std::size_t>(c); }

    bool same_spatial(const Shape4& o) const { return h == o.h && w == o.w && d == o.d; }
    Shape4 with_channels(int channels) const { return {h, w, d, channels}; }

    bool valid() const { return h >= 1 && w >= 1 && d >= 1 && c >= 0; }
    std::string str() const;

    friend bool operator==(const Shape4&, const Shape4&) = default;
};

/// Dense rank-4 tensor.
///
/// Memory order is spatial-major, channel-fastest:
///   index(h, w, d, c) = ((h * W + w) * D + d) * C + c
/// Every kernel in the library is written against this order; the on-disk
/// volume format uses the same order with C == 1.
template <typename T>
class BasicTensor4 {
public:
    using value_type = T;

    BasicTensor4() : shape_{1, 1, 1, 0} {}

    explicit BasicTensor4(Shape4 shape, T fill = T{}) : shape_(shape) {
        check_shape(shape);
        data_.assign(shape.size(), fill);
    }

    BasicTensor4(Shape4 shape, std::vector<T> values) : shape_(shape), data_(std::move(values)) {
        check_shape(shape);
        if (data_.size() != shape.size()) {
            throw ShapeError("tensor data length " + std::to_string(data_.size()) +
                             " does not match shape " + shape.str());
        }
    }

    const Shape4& shape() const { return shape_; }
    int channels() const { return shape_.c; }
    std::size_t size() const { return data_.size(); }

    std::span<const T> data() const { return data_; }
    std::span<T> data() { return data_; }
    const std::vector<T>& values() const { return data_; }
    std::vector<T>& values() { return data_; }

    std::size_t voxel_index(int h, int w, int d) const {
        return (static_cast<std::size_t>(h) * shape_.w + static_cast<std::size_t>(w)) * shape_.d +
               static_cast<std::size_t>(d);
    }
    std::size_t index(int h, int w, int d, int c) const {
        return voxel_index(h, w, d) * static_cast<std::size_t>(shape_.c) + static_cast<std::size_t>(c);
    }

    T& operator()(int h, int w, int d, int c) { return data_[index(h, w, d, c)]; }
    const T& operator()(int h, int w, int d, int c) const { return data_[index(h, w, d, c)]; }

    /// Pointer to the channel vector of one voxel.
    T* voxel(int h, int w, int d) { return data_.data() + voxel_index(h, w, d) * shape_.c; }
    const T* voxel(int h, int w, int d) const { return data_.data() + voxel_index(h, w, d) * shape_.c; }

    template <typename U>
    BasicTensor4<U> cast() const {
        std::vector<U> out(data_.begin(), data_.end());
        return BasicTensor4<U>(shape_, std::move(out));
    }

    friend bool operator==(const BasicTensor4& a, const BasicTensor4& b) {
        return a.shape_ == b.shape_ && a.data_ == b.data_;
    }

private:
    static void check_shape(const Shape4& s) {
        if (!s.valid()) throw ShapeError("invalid tensor shape " + s.str());
    }

    Shape4 shape_;
    std::vector<T> data_;
};

using Tensor4 = BasicTensor4<float>;
using Tensor4d = BasicTensor4<double>;

/// [a, b] along the channel axis; channels of `a` come first.
template <typename T>
BasicTensor4<T> concat_channels(const BasicTensor4<T>& a, const BasicTensor4<T>& b);

/// Channels [begin, begin + count) of `x`. Backward of concat_channels.
template <typename T>
BasicTensor4<T> slice_channels(const BasicTensor4<T>& x, int begin, int count);

template <typename T>
BasicTensor4<T> add_elementwise(const BasicTensor4<T>& a, const BasicTensor4<T>& b);

/// In-place accumulate, used by backward passes.
template <typename T>
void accumulate(BasicTensor4<T>& into, const BasicTensor4<T>& x);

/// Grows every spatial extent by 2 * pad with zeros on both sides.
template <typename T>
BasicTensor4<T> pad_zero(const BasicTensor4<T>& x, int pad);

/// Inverse of pad_zero: removes `pad` voxels from both sides of every spatial axis.
template <typename T>
BasicTensor4<T> crop_center(const BasicTensor4<T>& x, int pad);

/// Zero-pads the high end of each spatial axis to the given extents.
template <typename T>
BasicTensor4<T> pad_to(const BasicTensor4<T>& x, int h, int w, int d);

/// Keeps the low corner [0, h) x [0, w) x [0, d). Backward of pad_to.
template <typename T>
BasicTensor4<T> crop_to(const BasicTensor4<T>& x, int h, int w, int d);

template <typename T>
bool all_finite(const BasicTensor4<T>& x);

}  // namespace plsnet
