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

// Layer primitives with hand-written backward functions. Forward functions
// are pure; backward functions take the tensors their forward consumed plus
// the upstream gradient and return gradients for every input and parameter.

#include <array>
#include <span>
#include <vector>

#include "plsnet/kernels.hpp"
#include "plsnet/labels.hpp"
#include "plsnet/tensor.hpp"

namespace plsnet {

enum class NormMode { kTrain, kInfer };

inline constexpr double kBatchNormEps = 1e-5;
inline constexpr double kBatchNormMomentum = 0.1;
inline constexpr double kProbabilityFloor = 1e-12;

// ---------------------------------------------------------------------------
// Convolutions

template <typename T>
BasicTensor4<T> conv3d(const BasicTensor4<T>& x, const ConvKernel<T>& w, const ConvGeometry& g);

template <typename T>
BasicTensor4<T> depthwise_conv3d(const BasicTensor4<T>& x, const DepthwiseKernel<T>& d, const ConvGeometry& g);

template <typename T>
BasicTensor4<T> pointwise_conv3d(const BasicTensor4<T>& x, const PointwiseKernel<T>& p);

/// Full kernel equivalent to a depthwise kernel followed by a pointwise one:
/// W[i,j,k,m,n] = D[i,j,k,m] * P[m,n].
template <typename T>
struct ComposedKernel {
    int k = 1;
    int m = 1;
    int n = 1;
    std::vector<T> weights;

    ConvKernel<T> view() const { return {k, m, n, weights}; }
};

template <typename T>
ComposedKernel<T> compose_factorised_kernel(const DepthwiseKernel<T>& d, const PointwiseKernel<T>& p);

template <typename T>
struct ConvGrads {
    BasicTensor4<T> input;
    std::vector<T> weights;
};

template <typename T>
ConvGrads<T> conv3d_backward(const BasicTensor4<T>& x, const ConvKernel<T>& w, const ConvGeometry& g,
                             const BasicTensor4<T>& dy);
template <typename T>
ConvGrads<T> depthwise_conv3d_backward(const BasicTensor4<T>& x, const DepthwiseKernel<T>& d,
                                       const ConvGeometry& g, const BasicTensor4<T>& dy);
template <typename T>
ConvGrads<T> pointwise_conv3d_backward(const BasicTensor4<T>& x, const PointwiseKernel<T>& p,
                                       const BasicTensor4<T>& dy);

// ---------------------------------------------------------------------------
// Batch normalisation
//
// Batch size is one, so train-mode statistics are taken over the spatial
// extent of the single volume. Running statistics follow the usual exponential
// moving average; the running variance is updated with the unbiased estimate.

/// Non-owning view of one BN layer's parameters.
template <typename T>
struct BatchNormRef {
    std::span<const T> gamma;
    std::span<const T> beta;
    std::span<T> running_mean;
    std::span<T> running_var;
    double eps = kBatchNormEps;
    double momentum = kBatchNormMomentum;

    int channels() const { return static_cast<int>(gamma.size()); }
};

template <typename T>
struct BatchNormParams {
    std::vector<T> gamma;
    std::vector<T> beta;
    std::vector<T> running_mean;
    std::vector<T> running_var;
    double eps = kBatchNormEps;
    double momentum = kBatchNormMomentum;

    explicit BatchNormParams(int channels)
        : gamma(channels, T{1}), beta(channels, T{0}), running_mean(channels, T{0}), running_var(channels, T{1}) {}

    BatchNormRef<T> ref() { return {gamma, beta, running_mean, running_var, eps, momentum}; }
};

/// Per-channel statistics the normalisation actually used: batch statistics
/// in train mode, running statistics in infer mode.
template <typename T>
struct BatchNormStats {
    std::vector<T> mean;
    std::vector<T> inv_std;
    NormMode mode = NormMode::kTrain;
};

/// Normalises x; in train mode also updates the running statistics in `p`.
template <typename T>
BasicTensor4<T> batch_norm(const BasicTensor4<T>& x, const BatchNormRef<T>& p, NormMode mode,
                           BatchNormStats<T>* stats = nullptr);

/// Re-applies a normalisation with fixed statistics. Bit-identical to the
/// batch_norm call that produced `stats`; used when recomputing activations.
template <typename T>
BasicTensor4<T> batch_norm_apply(const BasicTensor4<T>& x, const BatchNormStats<T>& stats,
                                 std::span<const T> gamma, std::span<const T> beta);

template <typename T>
struct BatchNormGrads {
    BasicTensor4<T> input;
    std::vector<T> gamma;
    std::vector<T> beta;
};

template <typename T>
BatchNormGrads<T> batch_norm_backward(const BasicTensor4<T>& x, const BatchNormStats<T>& stats,
                                      std::span<const T> gamma, const BasicTensor4<T>& dy);

// ---------------------------------------------------------------------------
// Activations and loss

template <typename T>
BasicTensor4<T> relu(const BasicTensor4<T>& x);

/// Passes dy where x > 0 (subgradient 0 at x <= 0).
template <typename T>
BasicTensor4<T> relu_backward(const BasicTensor4<T>& x, const BasicTensor4<T>& dy);

/// Softmax over the channel axis at every voxel, max-subtracted.
template <typename T>
BasicTensor4<T> softmax_channels(const BasicTensor4<T>& x);

/// Backward of softmax given its output y: dx = y * (dy - <dy, y>).
template <typename T>
BasicTensor4<T> softmax_backward(const BasicTensor4<T>& y, const BasicTensor4<T>& dy);

/// Mean over voxels of -log(max(p[label], 1e-12)).
template <typename T>
double cross_entropy_loss(const BasicTensor4<T>& probabilities, const LabeledVolume& target);

/// Gradient of cross_entropy_loss w.r.t. the probabilities.
template <typename T>
BasicTensor4<T> cross_entropy_backward(const BasicTensor4<T>& probabilities, const LabeledVolume& target);

/// Gradient of cross_entropy_loss(softmax(logits)) w.r.t. the logits, given
/// the softmax output: (p - onehot) / voxel_count.
template <typename T>
BasicTensor4<T> softmax_cross_entropy_backward(const BasicTensor4<T>& probabilities,
                                               const LabeledVolume& target);

// ---------------------------------------------------------------------------
// Trilinear resampling (align-corners false, edge clamp). Separable: one
// linear pass per axis, which is the same blend of the 8 nearest voxels.

/// Output extent along one axis is in * num / den (integer division).
struct ScaleFactor {
    int num = 1;
    int den = 1;
};

template <typename T>
BasicTensor4<T> trilinear_resample(const BasicTensor4<T>& x, int h, int w, int d);

template <typename T>
BasicTensor4<T> trilinear_resample(const BasicTensor4<T>& x, std::array<ScaleFactor, 3> factor);

/// Adjoint of trilinear_resample onto `input_shape`.
template <typename T>
BasicTensor4<T> trilinear_resample_backward(const BasicTensor4<T>& dy, const Shape4& input_shape);

}  // namespace plsnet
