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

#include <cstdint>
#include <span>
#include <vector>

#include "plsnet/tensor.hpp"

namespace plsnet {

/// Stride, dilation and symmetric zero padding of a cubic convolution.
struct ConvGeometry {
    int stride = 1;
    int dilation = 1;
    int padding = 0;

    /// "Same" padding for an odd kernel at the given dilation.
    static ConvGeometry same(int k, int dilation = 1, int stride = 1) {
        return {stride, dilation, dilation * (k - 1) / 2};
    }

    int dilated_extent(int k) const { return dilation * (k - 1) + 1; }

    /// floor((in + 2p - dilated_extent) / stride) + 1, or <= 0 when the kernel does not fit.
    int output_extent(int in, int k) const {
        const int span = in + 2 * padding - dilated_extent(k);
        if (span < 0) return 0;
        return span / stride + 1;
    }

    Shape4 output_shape(const Shape4& in, int k, int channels) const;
};

/// Full kernel W[i][j][k][m][n], n fastest. No bias.
template <typename T>
struct ConvKernel {
    int k = 1;
    int m = 1;
    int n = 1;
    std::span<const T> weights;

    std::size_t taps() const { return static_cast<std::size_t>(k) * k * k; }
    void validate() const;
};

/// Per-channel spatial kernel D[i][j][k][m], m fastest.
template <typename T>
struct DepthwiseKernel {
    int k = 1;
    int m = 1;
    std::span<const T> weights;

    std::size_t taps() const { return static_cast<std::size_t>(k) * k * k; }
    void validate() const;
};

/// Channel mixing matrix P[m][n], n fastest.
template <typename T>
struct PointwiseKernel {
    int m = 1;
    int n = 1;
    std::span<const T> weights;

    void validate() const;
};

/// OpenMP kernels. All of them parallelise over output voxels (forward,
/// input gradient) or kernel taps / input channels (weight gradient), so every
/// accumulation runs in a fixed serial order and results do not depend on the
/// thread count.
namespace kernels {

template <typename T>
BasicTensor4<T> conv3d(const BasicTensor4<T>& x, const ConvKernel<T>& w, const ConvGeometry& g);
template <typename T>
BasicTensor4<T> conv3d_backward_input(const BasicTensor4<T>& dy, const ConvKernel<T>& w,
                                      const ConvGeometry& g, const Shape4& input_shape);
template <typename T>
std::vector<T> conv3d_backward_weights(const BasicTensor4<T>& x, const BasicTensor4<T>& dy, int k,
                                       const ConvGeometry& g);

template <typename T>
BasicTensor4<T> depthwise3d(const BasicTensor4<T>& x, const DepthwiseKernel<T>& w, const ConvGeometry& g);
template <typename T>
BasicTensor4<T> depthwise3d_backward_input(const BasicTensor4<T>& dy, const DepthwiseKernel<T>& w,
                                           const ConvGeometry& g, const Shape4& input_shape);
template <typename T>
std::vector<T> depthwise3d_backward_weights(const BasicTensor4<T>& x, const BasicTensor4<T>& dy, int k,
                                            const ConvGeometry& g);

template <typename T>
BasicTensor4<T> pointwise3d(const BasicTensor4<T>& x, const PointwiseKernel<T>& p);
template <typename T>
BasicTensor4<T> pointwise3d_backward_input(const BasicTensor4<T>& dy, const PointwiseKernel<T>& p);
template <typename T>
std::vector<T> pointwise3d_backward_weights(const BasicTensor4<T>& x, const BasicTensor4<T>& dy);

/// Serial, straightforward loops. Every tap is visited, including the ones
/// that land in the zero padding, so `macs` (when given) counts exactly what
/// the cost model charges for the layer.
namespace reference {

template <typename T>
BasicTensor4<T> conv3d(const BasicTensor4<T>& x, const ConvKernel<T>& w, const ConvGeometry& g,
                       std::uint64_t* macs = nullptr);
template <typename T>
BasicTensor4<T> depthwise3d(const BasicTensor4<T>& x, const DepthwiseKernel<T>& w, const ConvGeometry& g,
                            std::uint64_t* macs = nullptr);
template <typename T>
BasicTensor4<T> pointwise3d(const BasicTensor4<T>& x, const PointwiseKernel<T>& p,
                            std::uint64_t* macs = nullptr);

}  // namespace reference
}  // namespace kernels
}  // namespace plsnet
