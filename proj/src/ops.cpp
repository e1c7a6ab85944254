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

#include "plsnet/ops.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace plsnet {

// ---------------------------------------------------------------------------
// Convolutions

template <typename T>
BasicTensor4<T> conv3d(const BasicTensor4<T>& x, const ConvKernel<T>& w, const ConvGeometry& g) {
    return kernels::conv3d(x, w, g);
}

template <typename T>
BasicTensor4<T> depthwise_conv3d(const BasicTensor4<T>& x, const DepthwiseKernel<T>& d, const ConvGeometry& g) {
    return kernels::depthwise3d(x, d, g);
}

template <typename T>
BasicTensor4<T> pointwise_conv3d(const BasicTensor4<T>& x, const PointwiseKernel<T>& p) {
    return kernels::pointwise3d(x, p);
}

template <typename T>
ComposedKernel<T> compose_factorised_kernel(const DepthwiseKernel<T>& d, const PointwiseKernel<T>& p) {
    d.validate();
    p.validate();
    if (d.m != p.m) {
        throw ShapeError("compose_factorised_kernel: depthwise has " + std::to_string(d.m) +
                         " channels, pointwise expects " + std::to_string(p.m));
    }
    ComposedKernel<T> out{d.k, d.m, p.n, std::vector<T>(d.taps() * d.m * p.n)};
    for (std::size_t tap = 0; tap < d.taps(); ++tap) {
        for (int m = 0; m < d.m; ++m) {
            const T dv = d.weights[tap * d.m + m];
            for (int n = 0; n < p.n; ++n) {
                out.weights[(tap * d.m + m) * p.n + n] = dv * p.weights[static_cast<std::size_t>(m) * p.n + n];
            }
        }
    }
    return out;
}

template <typename T>
ConvGrads<T> conv3d_backward(const BasicTensor4<T>& x, const ConvKernel<T>& w, const ConvGeometry& g,
                             const BasicTensor4<T>& dy) {
    return {kernels::conv3d_backward_input(dy, w, g, x.shape()), kernels::conv3d_backward_weights(x, dy, w.k, g)};
}

template <typename T>
ConvGrads<T> depthwise_conv3d_backward(const BasicTensor4<T>& x, const DepthwiseKernel<T>& d,
                                       const ConvGeometry& g, const BasicTensor4<T>& dy) {
    return {kernels::depthwise3d_backward_input(dy, d, g, x.shape()),
            kernels::depthwise3d_backward_weights(x, dy, d.k, g)};
}

template <typename T>
ConvGrads<T> pointwise_conv3d_backward(const BasicTensor4<T>& x, const PointwiseKernel<T>& p,
                                       const BasicTensor4<T>& dy) {
    if (!x.shape().same_spatial(dy.shape())) {
        throw ShapeError("pointwise backward: input " + x.shape().str() + " vs upstream " + dy.shape().str());
    }
    return {kernels::pointwise3d_backward_input(dy, p), kernels::pointwise3d_backward_weights(x, dy)};
}

// ---------------------------------------------------------------------------
// Fixed-order channel reductions

namespace {

constexpr std::ptrdiff_t kReduceChunk = 4096;

// out[c] = sum over voxels of f(v, c), accumulated in double in a fixed order
// (chunk partials are combined serially) so results ignore the thread count.
template <typename F>
std::vector<double> channel_reduce(std::ptrdiff_t voxels, int channels, F&& f) {
    const std::ptrdiff_t chunks = (voxels + kReduceChunk - 1) / kReduceChunk;
    std::vector<double> partial(static_cast<std::size_t>(chunks) * channels, 0.0);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t ch = 0; ch < chunks; ++ch) {
        double* acc = partial.data() + ch * channels;
        const std::ptrdiff_t end = std::min(voxels, (ch + 1) * kReduceChunk);
        for (std::ptrdiff_t v = ch * kReduceChunk; v < end; ++v) {
            for (int c = 0; c < channels; ++c) acc[c] += f(v, c);
        }
    }
    std::vector<double> out(channels, 0.0);
    for (std::ptrdiff_t ch = 0; ch < chunks; ++ch) {
        for (int c = 0; c < channels; ++c) out[c] += partial[ch * channels + c];
    }
    return out;
}

void require_bn_channels(int have, std::size_t want) {
    if (static_cast<std::size_t>(have) != want) {
        throw ShapeError("batch_norm: input has " + std::to_string(have) + " channels, parameters have " +
                         std::to_string(want));
    }
}

}  // namespace

// ---------------------------------------------------------------------------
// Batch normalisation

template <typename T>
BasicTensor4<T> batch_norm_apply(const BasicTensor4<T>& x, const BatchNormStats<T>& stats,
                                 std::span<const T> gamma, std::span<const T> beta) {
    const int C = x.channels();
    require_bn_channels(C, gamma.size());
    require_bn_channels(C, beta.size());
    require_bn_channels(C, stats.mean.size());
    BasicTensor4<T> y(x.shape());
    const std::ptrdiff_t voxels = static_cast<std::ptrdiff_t>(x.shape().voxels());
    const T* X = x.data().data();
    T* Y = y.data().data();
    const T* mean = stats.mean.data();
    const T* inv = stats.inv_std.data();
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t v = 0; v < voxels; ++v) {
        for (int c = 0; c < C; ++c) {
            Y[v * C + c] = (X[v * C + c] - mean[c]) * inv[c] * gamma[c] + beta[c];
        }
    }
    return y;
}

template <typename T>
BasicTensor4<T> batch_norm(const BasicTensor4<T>& x, const BatchNormRef<T>& p, NormMode mode,
                           BatchNormStats<T>* stats_out) {
    const int C = x.channels();
    require_bn_channels(C, p.gamma.size());
    require_bn_channels(C, p.beta.size());
    require_bn_channels(C, p.running_mean.size());
    require_bn_channels(C, p.running_var.size());

    BatchNormStats<T> stats;
    stats.mode = mode;
    stats.mean.resize(C);
    stats.inv_std.resize(C);
    if (mode == NormMode::kTrain) {
        const std::ptrdiff_t voxels = static_cast<std::ptrdiff_t>(x.shape().voxels());
        const T* X = x.data().data();
        const auto sums = channel_reduce(voxels, C, [&](std::ptrdiff_t v, int c) {
            return static_cast<double>(X[v * C + c]);
        });
        std::vector<double> mean(C);
        for (int c = 0; c < C; ++c) mean[c] = sums[c] / static_cast<double>(voxels);
        const auto sq = channel_reduce(voxels, C, [&](std::ptrdiff_t v, int c) {
            const double dv = static_cast<double>(X[v * C + c]) - mean[c];
            return dv * dv;
        });
        for (int c = 0; c < C; ++c) {
            const double var = sq[c] / static_cast<double>(voxels);
            stats.mean[c] = static_cast<T>(mean[c]);
            stats.inv_std[c] = static_cast<T>(1.0 / std::sqrt(var + p.eps));
            const double unbiased = voxels > 1 ? var * voxels / static_cast<double>(voxels - 1) : var;
            p.running_mean[c] = static_cast<T>((1.0 - p.momentum) * p.running_mean[c] + p.momentum * mean[c]);
            p.running_var[c] = static_cast<T>((1.0 - p.momentum) * p.running_var[c] + p.momentum * unbiased);
        }
    } else {
        for (int c = 0; c < C; ++c) {
            stats.mean[c] = p.running_mean[c];
            stats.inv_std[c] = static_cast<T>(1.0 / std::sqrt(static_cast<double>(p.running_var[c]) + p.eps));
        }
    }
    BasicTensor4<T> y = batch_norm_apply(x, stats, p.gamma, p.beta);
    if (stats_out) *stats_out = std::move(stats);
    return y;
}

template <typename T>
BatchNormGrads<T> batch_norm_backward(const BasicTensor4<T>& x, const BatchNormStats<T>& stats,
                                      std::span<const T> gamma, const BasicTensor4<T>& dy) {
    const int C = x.channels();
    if (x.shape() != dy.shape()) {
        throw ShapeError("batch_norm backward: input " + x.shape().str() + " vs upstream " + dy.shape().str());
    }
    require_bn_channels(C, gamma.size());
    const std::ptrdiff_t voxels = static_cast<std::ptrdiff_t>(x.shape().voxels());
    const T* X = x.data().data();
    const T* DY = dy.data().data();
    const T* mean = stats.mean.data();
    const T* inv = stats.inv_std.data();

    auto xhat = [&](std::ptrdiff_t v, int c) {
        return static_cast<double>((X[v * C + c] - mean[c]) * inv[c]);
    };
    const auto sum_dy = channel_reduce(voxels, C, [&](std::ptrdiff_t v, int c) {
        return static_cast<double>(DY[v * C + c]);
    });
    const auto sum_dy_xhat = channel_reduce(voxels, C, [&](std::ptrdiff_t v, int c) {
        return static_cast<double>(DY[v * C + c]) * xhat(v, c);
    });

    BatchNormGrads<T> g{BasicTensor4<T>(x.shape()), std::vector<T>(C), std::vector<T>(C)};
    for (int c = 0; c < C; ++c) {
        g.gamma[c] = static_cast<T>(sum_dy_xhat[c]);
        g.beta[c] = static_cast<T>(sum_dy[c]);
    }
    T* DX = g.input.data().data();
    if (stats.mode == NormMode::kTrain) {
        // dx = inv * gamma * (dy - mean(dy) - xhat * mean(dy * xhat))
        std::vector<double> mdy(C), mdyx(C), scale(C);
        for (int c = 0; c < C; ++c) {
            mdy[c] = sum_dy[c] / static_cast<double>(voxels);
            mdyx[c] = sum_dy_xhat[c] / static_cast<double>(voxels);
            scale[c] = static_cast<double>(inv[c]) * static_cast<double>(gamma[c]);
        }
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t v = 0; v < voxels; ++v) {
            for (int c = 0; c < C; ++c) {
                DX[v * C + c] = static_cast<T>(scale[c] * (DY[v * C + c] - mdy[c] - xhat(v, c) * mdyx[c]));
            }
        }
    } else {
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t v = 0; v < voxels; ++v) {
            for (int c = 0; c < C; ++c) DX[v * C + c] = DY[v * C + c] * gamma[c] * inv[c];
        }
    }
    return g;
}

// ---------------------------------------------------------------------------
// Activations and loss

template <typename T>
BasicTensor4<T> relu(const BasicTensor4<T>& x) {
    BasicTensor4<T> y(x.shape());
    const auto in = x.data();
    auto out = y.data();
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(in.size()); ++i) {
        out[i] = in[i] > T{0} ? in[i] : T{0};
    }
    return y;
}

template <typename T>
BasicTensor4<T> relu_backward(const BasicTensor4<T>& x, const BasicTensor4<T>& dy) {
    if (x.shape() != dy.shape()) {
        throw ShapeError("relu backward: input " + x.shape().str() + " vs upstream " + dy.shape().str());
    }
    BasicTensor4<T> dx(x.shape());
    const auto in = x.data();
    const auto up = dy.data();
    auto out = dx.data();
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(in.size()); ++i) {
        out[i] = in[i] > T{0} ? up[i] : T{0};
    }
    return dx;
}

template <typename T>
BasicTensor4<T> softmax_channels(const BasicTensor4<T>& x) {
    const int C = x.channels();
    if (C < 1) throw ShapeError("softmax_channels: no channels");
    BasicTensor4<T> y(x.shape());
    const std::ptrdiff_t voxels = static_cast<std::ptrdiff_t>(x.shape().voxels());
    const T* X = x.data().data();
    T* Y = y.data().data();
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t v = 0; v < voxels; ++v) {
        const T* xv = X + v * C;
        T* yv = Y + v * C;
        const T mx = *std::max_element(xv, xv + C);
        T sum = 0;
        for (int c = 0; c < C; ++c) {
            yv[c] = std::exp(xv[c] - mx);
            sum += yv[c];
        }
        for (int c = 0; c < C; ++c) yv[c] /= sum;
    }
    return y;
}

template <typename T>
BasicTensor4<T> softmax_backward(const BasicTensor4<T>& y, const BasicTensor4<T>& dy) {
    if (y.shape() != dy.shape()) {
        throw ShapeError("softmax backward: output " + y.shape().str() + " vs upstream " + dy.shape().str());
    }
    const int C = y.channels();
    BasicTensor4<T> dx(y.shape());
    const std::ptrdiff_t voxels = static_cast<std::ptrdiff_t>(y.shape().voxels());
    const T* Y = y.data().data();
    const T* DY = dy.data().data();
    T* DX = dx.data().data();
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t v = 0; v < voxels; ++v) {
        T dot = 0;
        for (int c = 0; c < C; ++c) dot += DY[v * C + c] * Y[v * C + c];
        for (int c = 0; c < C; ++c) DX[v * C + c] = Y[v * C + c] * (DY[v * C + c] - dot);
    }
    return dx;
}

namespace {

template <typename T>
void check_target(const BasicTensor4<T>& p, const LabeledVolume& target) {
    const Shape4& s = p.shape();
    if (s.h != target.dims.h || s.w != target.dims.w || s.d != target.dims.d) {
        throw ShapeError("cross_entropy: prediction " + s.str() + " vs target " + target.dims.str());
    }
    if (target.labels.size() != target.dims.voxels()) {
        throw ShapeError("cross_entropy: target holds " + std::to_string(target.labels.size()) + " labels");
    }
    for (std::uint16_t l : target.labels) {
        if (l >= s.c) {
            throw std::out_of_range("cross_entropy: label " + std::to_string(l) + " outside [0, " +
                                    std::to_string(s.c) + ")");
        }
    }
}

}  // namespace

template <typename T>
double cross_entropy_loss(const BasicTensor4<T>& probabilities, const LabeledVolume& target) {
    check_target(probabilities, target);
    const int C = probabilities.channels();
    const std::ptrdiff_t voxels = static_cast<std::ptrdiff_t>(target.labels.size());
    const T* P = probabilities.data().data();
    const auto total = channel_reduce(voxels, 1, [&](std::ptrdiff_t v, int) {
        const double p = static_cast<double>(P[v * C + target.labels[v]]);
        return -std::log(std::max(p, kProbabilityFloor));
    });
    return total[0] / static_cast<double>(voxels);
}

template <typename T>
BasicTensor4<T> cross_entropy_backward(const BasicTensor4<T>& probabilities, const LabeledVolume& target) {
    check_target(probabilities, target);
    const int C = probabilities.channels();
    const std::ptrdiff_t voxels = static_cast<std::ptrdiff_t>(target.labels.size());
    BasicTensor4<T> dp(probabilities.shape());
    const T* P = probabilities.data().data();
    T* DP = dp.data().data();
    const double n = static_cast<double>(voxels);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t v = 0; v < voxels; ++v) {
        const double p = static_cast<double>(P[v * C + target.labels[v]]);
        DP[v * C + target.labels[v]] = p >= kProbabilityFloor ? static_cast<T>(-1.0 / (n * p)) : T{0};
    }
    return dp;
}

template <typename T>
BasicTensor4<T> softmax_cross_entropy_backward(const BasicTensor4<T>& probabilities,
                                               const LabeledVolume& target) {
    check_target(probabilities, target);
    const int C = probabilities.channels();
    const std::ptrdiff_t voxels = static_cast<std::ptrdiff_t>(target.labels.size());
    BasicTensor4<T> dz(probabilities.shape());
    const T* P = probabilities.data().data();
    T* DZ = dz.data().data();
    const T inv_n = static_cast<T>(1.0 / static_cast<double>(voxels));
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t v = 0; v < voxels; ++v) {
        for (int c = 0; c < C; ++c) {
            const T onehot = c == target.labels[v] ? T{1} : T{0};
            DZ[v * C + c] = (P[v * C + c] - onehot) * inv_n;
        }
    }
    return dz;
}

// ---------------------------------------------------------------------------
// Trilinear resampling

namespace {

template <typename T>
struct AxisTap {
    int i0 = 0;
    int i1 = 0;
    T frac = 0;
};

// Source taps of every output index when resampling `in` voxels onto `out`
// voxels with voxel centres at (i + 0.5) / extent.
template <typename T>
std::vector<AxisTap<T>> axis_taps(int in, int out) {
    std::vector<AxisTap<T>> taps(out);
    const double scale = static_cast<double>(in) / static_cast<double>(out);
    for (int i = 0; i < out; ++i) {
        double src = (i + 0.5) * scale - 0.5;
        src = std::clamp(src, 0.0, static_cast<double>(in - 1));
        const int i0 = static_cast<int>(std::floor(src));
        taps[i] = {i0, std::min(i0 + 1, in - 1), static_cast<T>(src - i0)};
    }
    return taps;
}

// Extents of a tensor viewed as [outer, axis, inner] for axis 0, 1 or 2.
struct AxisView {
    std::ptrdiff_t outer;
    int axis;
    std::ptrdiff_t inner;
};

AxisView axis_view(const Shape4& s, int axis) {
    switch (axis) {
        case 0: return {1, s.h, static_cast<std::ptrdiff_t>(s.w) * s.d * s.c};
        case 1: return {s.h, s.w, static_cast<std::ptrdiff_t>(s.d) * s.c};
        default: return {static_cast<std::ptrdiff_t>(s.h) * s.w, s.d, s.c};
    }
}

Shape4 with_axis(Shape4 s, int axis, int extent) {
    if (axis == 0) s.h = extent;
    else if (axis == 1) s.w = extent;
    else s.d = extent;
    return s;
}

template <typename T>
BasicTensor4<T> resample_axis(const BasicTensor4<T>& x, int axis, int out_extent) {
    const AxisView in = axis_view(x.shape(), axis);
    if (in.axis == out_extent) return x;
    const auto taps = axis_taps<T>(in.axis, out_extent);
    BasicTensor4<T> y(with_axis(x.shape(), axis, out_extent));
    const T* X = x.data().data();
    T* Y = y.data().data();
#pragma omp parallel for collapse(2) schedule(static)
    for (std::ptrdiff_t o = 0; o < in.outer; ++o) {
        for (int i = 0; i < out_extent; ++i) {
            const AxisTap<T> t = taps[i];
            const T* a = X + (o * in.axis + t.i0) * in.inner;
            const T* b = X + (o * in.axis + t.i1) * in.inner;
            T* dst = Y + (o * out_extent + i) * in.inner;
            const T wa = T{1} - t.frac;
            for (std::ptrdiff_t r = 0; r < in.inner; ++r) dst[r] = wa * a[r] + t.frac * b[r];
        }
    }
    return y;
}

// Transpose of resample_axis, written as a gather over source indices.
template <typename T>
BasicTensor4<T> resample_axis_backward(const BasicTensor4<T>& dy, int axis, int in_extent) {
    const AxisView out = axis_view(dy.shape(), axis);
    if (out.axis == in_extent) return dy;
    const auto taps = axis_taps<T>(in_extent, out.axis);
    std::vector<std::vector<std::pair<int, T>>> sources(in_extent);
    for (int i = 0; i < out.axis; ++i) {
        sources[taps[i].i0].push_back({i, T{1} - taps[i].frac});
        sources[taps[i].i1].push_back({i, taps[i].frac});
    }
    BasicTensor4<T> dx(with_axis(dy.shape(), axis, in_extent));
    const T* DY = dy.data().data();
    T* DX = dx.data().data();
#pragma omp parallel for collapse(2) schedule(static)
    for (std::ptrdiff_t o = 0; o < out.outer; ++o) {
        for (int j = 0; j < in_extent; ++j) {
            T* dst = DX + (o * in_extent + j) * out.inner;
            for (const auto& [i, wt] : sources[j]) {
                const T* src = DY + (o * out.axis + i) * out.inner;
                for (std::ptrdiff_t r = 0; r < out.inner; ++r) dst[r] += wt * src[r];
            }
        }
    }
    return dx;
}

}  // namespace

template <typename T>
BasicTensor4<T> trilinear_resample(const BasicTensor4<T>& x, int h, int w, int d) {
    if (h < 1 || w < 1 || d < 1) {
        throw ShapeError("trilinear_resample: target extents must be >= 1");
    }
    return resample_axis(resample_axis(resample_axis(x, 0, h), 1, w), 2, d);
}

template <typename T>
BasicTensor4<T> trilinear_resample(const BasicTensor4<T>& x, std::array<ScaleFactor, 3> factor) {
    const Shape4& s = x.shape();
    auto scaled = [](int extent, ScaleFactor f) {
        if (f.num < 1 || f.den < 1) throw std::invalid_argument("trilinear_resample: scale must be positive");
        return static_cast<int>(static_cast<long long>(extent) * f.num / f.den);
    };
    return trilinear_resample(x, scaled(s.h, factor[0]), scaled(s.w, factor[1]), scaled(s.d, factor[2]));
}

template <typename T>
BasicTensor4<T> trilinear_resample_backward(const BasicTensor4<T>& dy, const Shape4& input_shape) {
    if (dy.channels() != input_shape.c) {
        throw ShapeError("trilinear backward: upstream " + dy.shape().str() + " vs input " + input_shape.str());
    }
    return resample_axis_backward(
        resample_axis_backward(resample_axis_backward(dy, 2, input_shape.d), 1, input_shape.w), 0,
        input_shape.h);
}

#define PLSNET_INSTANTIATE(T)                                                                                   \
    template BasicTensor4<T> conv3d(const BasicTensor4<T>&, const ConvKernel<T>&, const ConvGeometry&);         \
    template BasicTensor4<T> depthwise_conv3d(const BasicTensor4<T>&, const DepthwiseKernel<T>&,                \
                                              const ConvGeometry&);                                             \
    template BasicTensor4<T> pointwise_conv3d(const BasicTensor4<T>&, const PointwiseKernel<T>&);               \
    template ComposedKernel<T> compose_factorised_kernel(const DepthwiseKernel<T>&, const PointwiseKernel<T>&); \
    template ConvGrads<T> conv3d_backward(const BasicTensor4<T>&, const ConvKernel<T>&, const ConvGeometry&,    \
                                          const BasicTensor4<T>&);                                              \
    template ConvGrads<T> depthwise_conv3d_backward(const BasicTensor4<T>&, const DepthwiseKernel<T>&,          \
                                                    const ConvGeometry&, const BasicTensor4<T>&);               \
    template ConvGrads<T> pointwise_conv3d_backward(const BasicTensor4<T>&, const PointwiseKernel<T>&,          \
                                                    const BasicTensor4<T>&);                                    \
    template BasicTensor4<T> batch_norm(const BasicTensor4<T>&, const BatchNormRef<T>&, NormMode,               \
                                        BatchNormStats<T>*);                                                    \
    template BasicTensor4<T> batch_norm_apply(const BasicTensor4<T>&, const BatchNormStats<T>&,                 \
                                              std::span<const T>, std::span<const T>);                          \
    template BatchNormGrads<T> batch_norm_backward(const BasicTensor4<T>&, const BatchNormStats<T>&,            \
                                                   std::span<const T>, const BasicTensor4<T>&);                 \
    template BasicTensor4<T> relu(const BasicTensor4<T>&);                                                      \
    template BasicTensor4<T> relu_backward(const BasicTensor4<T>&, const BasicTensor4<T>&);                     \
    template BasicTensor4<T> softmax_channels(const BasicTensor4<T>&);                                          \
    template BasicTensor4<T> softmax_backward(const BasicTensor4<T>&, const BasicTensor4<T>&);                  \
    template double cross_entropy_loss(const BasicTensor4<T>&, const LabeledVolume&);                           \
    template BasicTensor4<T> cross_entropy_backward(const BasicTensor4<T>&, const LabeledVolume&);              \
    template BasicTensor4<T> softmax_cross_entropy_backward(const BasicTensor4<T>&, const LabeledVolume&);      \
    template BasicTensor4<T> trilinear_resample(const BasicTensor4<T>&, int, int, int);                         \
    template BasicTensor4<T> trilinear_resample(const BasicTensor4<T>&, std::array<ScaleFactor, 3>);            \
    template BasicTensor4<T> trilinear_resample_backward(const BasicTensor4<T>&, const Shape4&);

PLSNET_INSTANTIATE(float)
PLSNET_INSTANTIATE(double)

#undef PLSNET_INSTANTIATE

}  // namespace plsnet
