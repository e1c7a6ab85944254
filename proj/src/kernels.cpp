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

#include "plsnet/kernels.hpp"

#include <string>

namespace plsnet {

Shape4 ConvGeometry::output_shape(const Shape4& in, int k, int channels) const {
    if (stride < 1 || dilation < 1 || padding < 0) {
        throw std::invalid_argument("conv geometry: stride and dilation must be >= 1, padding >= 0");
    }
    const Shape4 out{output_extent(in.h, k), output_extent(in.w, k), output_extent(in.d, k), channels};
    if (out.h < 1 || out.w < 1 || out.d < 1) {
        throw ShapeError("conv geometry: non-positive output extent for input " + in.str() + ", k=" +
                         std::to_string(k) + ", dilation=" + std::to_string(dilation) +
                         ", padding=" + std::to_string(padding));
    }
    return out;
}

template <typename T>
void ConvKernel<T>::validate() const {
    if (k < 1 || k % 2 == 0) throw std::invalid_argument("conv kernel extent must be odd and >= 1");
    if (m < 1 || n < 1) throw std::invalid_argument("conv kernel channel counts must be >= 1");
    if (weights.size() != taps() * m * n) {
        throw ShapeError("conv kernel holds " + std::to_string(weights.size()) + " weights, expected " +
                         std::to_string(taps() * m * n));
    }
}

template <typename T>
void DepthwiseKernel<T>::validate() const {
    if (k < 1 || k % 2 == 0) throw std::invalid_argument("depthwise kernel extent must be odd and >= 1");
    if (m < 1) throw std::invalid_argument("depthwise kernel channel count must be >= 1");
    if (weights.size() != taps() * m) {
        throw ShapeError("depthwise kernel holds " + std::to_string(weights.size()) +
                         " weights, expected " + std::to_string(taps() * m));
    }
}

template <typename T>
void PointwiseKernel<T>::validate() const {
    if (m < 1 || n < 1) throw std::invalid_argument("pointwise kernel channel counts must be >= 1");
    if (weights.size() != static_cast<std::size_t>(m) * n) {
        throw ShapeError("pointwise kernel holds " + std::to_string(weights.size()) +
                         " weights, expected " + std::to_string(m * n));
    }
}

namespace {

void require_channels(int have, int want, const char* op) {
    if (have != want) {
        throw ShapeError(std::string(op) + ": input has " + std::to_string(have) +
                         " channels, kernel expects " + std::to_string(want));
    }
}

// Input coordinate of output `o` at kernel tap `t`.
inline int in_coord(int o, int t, const ConvGeometry& g) { return o * g.stride - g.padding + t * g.dilation; }

// Output coordinate fed by input `i` at tap `t`, or -1.
inline int out_coord(int i, int t, const ConvGeometry& g, int out_extent) {
    const int num = i + g.padding - t * g.dilation;
    if (num < 0 || num % g.stride != 0) return -1;
    const int o = num / g.stride;
    return o < out_extent ? o : -1;
}

}  // namespace

namespace kernels {

template <typename T>
BasicTensor4<T> conv3d(const BasicTensor4<T>& x, const ConvKernel<T>& w, const ConvGeometry& g) {
    w.validate();
    require_channels(x.channels(), w.m, "conv3d");
    const Shape4& is = x.shape();
    const Shape4 os = g.output_shape(is, w.k, w.n);
    BasicTensor4<T> y(os);
    const int K = w.k, M = w.m, N = w.n;
    const T* W = w.weights.data();

#pragma omp parallel for collapse(2) schedule(static)
    for (int oh = 0; oh < os.h; ++oh) {
        for (int ow = 0; ow < os.w; ++ow) {
            for (int od = 0; od < os.d; ++od) {
                T* yv = y.voxel(oh, ow, od);
                for (int i = 0; i < K; ++i) {
                    const int ih = in_coord(oh, i, g);
                    if (ih < 0 || ih >= is.h) continue;
                    for (int j = 0; j < K; ++j) {
                        const int iw = in_coord(ow, j, g);
                        if (iw < 0 || iw >= is.w) continue;
                        for (int kk = 0; kk < K; ++kk) {
                            const int id = in_coord(od, kk, g);
                            if (id < 0 || id >= is.d) continue;
                            const T* xv = x.voxel(ih, iw, id);
                            const T* wt = W + static_cast<std::size_t>((i * K + j) * K + kk) * M * N;
                            for (int m = 0; m < M; ++m) {
                                const T xm = xv[m];
                                const T* wr = wt + static_cast<std::size_t>(m) * N;
                                for (int n = 0; n < N; ++n) yv[n] += xm * wr[n];
                            }
                        }
                    }
                }
            }
        }
    }
    return y;
}

template <typename T>
BasicTensor4<T> conv3d_backward_input(const BasicTensor4<T>& dy, const ConvKernel<T>& w,
                                      const ConvGeometry& g, const Shape4& input_shape) {
    w.validate();
    const Shape4 os = g.output_shape(input_shape, w.k, w.n);
    if (dy.shape() != os) {
        throw ShapeError("conv3d backward: upstream " + dy.shape().str() + " does not match output " + os.str());
    }
    BasicTensor4<T> dx(input_shape.with_channels(w.m));
    const int K = w.k, M = w.m, N = w.n;
    const T* W = w.weights.data();

#pragma omp parallel for collapse(2) schedule(static)
    for (int ih = 0; ih < input_shape.h; ++ih) {
        for (int iw = 0; iw < input_shape.w; ++iw) {
            for (int id = 0; id < input_shape.d; ++id) {
                T* dxv = dx.voxel(ih, iw, id);
                for (int i = 0; i < K; ++i) {
                    const int oh = out_coord(ih, i, g, os.h);
                    if (oh < 0) continue;
                    for (int j = 0; j < K; ++j) {
                        const int ow = out_coord(iw, j, g, os.w);
                        if (ow < 0) continue;
                        for (int kk = 0; kk < K; ++kk) {
                            const int od = out_coord(id, kk, g, os.d);
                            if (od < 0) continue;
                            const T* dyv = dy.voxel(oh, ow, od);
                            const T* wt = W + static_cast<std::size_t>((i * K + j) * K + kk) * M * N;
                            for (int m = 0; m < M; ++m) {
                                const T* wr = wt + static_cast<std::size_t>(m) * N;
                                T acc = 0;
                                for (int n = 0; n < N; ++n) acc += dyv[n] * wr[n];
                                dxv[m] += acc;
                            }
                        }
                    }
                }
            }
        }
    }
    return dx;
}

template <typename T>
std::vector<T> conv3d_backward_weights(const BasicTensor4<T>& x, const BasicTensor4<T>& dy, int k,
                                       const ConvGeometry& g) {
    const Shape4& is = x.shape();
    const Shape4 os = g.output_shape(is, k, dy.channels());
    if (dy.shape() != os) {
        throw ShapeError("conv3d backward: upstream " + dy.shape().str() + " does not match output " + os.str());
    }
    const int M = is.c, N = os.c;
    const int taps = k * k * k;
    std::vector<T> dw(static_cast<std::size_t>(taps) * M * N, T{0});

#pragma omp parallel for schedule(dynamic)
    for (int tap = 0; tap < taps; ++tap) {
        const int i = tap / (k * k), j = (tap / k) % k, kk = tap % k;
        T* dwt = dw.data() + static_cast<std::size_t>(tap) * M * N;
        for (int oh = 0; oh < os.h; ++oh) {
            const int ih = in_coord(oh, i, g);
            if (ih < 0 || ih >= is.h) continue;
            for (int ow = 0; ow < os.w; ++ow) {
                const int iw = in_coord(ow, j, g);
                if (iw < 0 || iw >= is.w) continue;
                for (int od = 0; od < os.d; ++od) {
                    const int id = in_coord(od, kk, g);
                    if (id < 0 || id >= is.d) continue;
                    const T* xv = x.voxel(ih, iw, id);
                    const T* dyv = dy.voxel(oh, ow, od);
                    for (int m = 0; m < M; ++m) {
                        const T xm = xv[m];
                        T* dr = dwt + static_cast<std::size_t>(m) * N;
                        for (int n = 0; n < N; ++n) dr[n] += xm * dyv[n];
                    }
                }
            }
        }
    }
    return dw;
}

template <typename T>
BasicTensor4<T> depthwise3d(const BasicTensor4<T>& x, const DepthwiseKernel<T>& w, const ConvGeometry& g) {
    w.validate();
    require_channels(x.channels(), w.m, "depthwise_conv3d");
    const Shape4& is = x.shape();
    const Shape4 os = g.output_shape(is, w.k, w.m);
    BasicTensor4<T> y(os);
    const int K = w.k, M = w.m;
    const T* D = w.weights.data();

#pragma omp parallel for collapse(2) schedule(static)
    for (int oh = 0; oh < os.h; ++oh) {
        for (int ow = 0; ow < os.w; ++ow) {
            for (int od = 0; od < os.d; ++od) {
                T* yv = y.voxel(oh, ow, od);
                for (int i = 0; i < K; ++i) {
                    const int ih = in_coord(oh, i, g);
                    if (ih < 0 || ih >= is.h) continue;
                    for (int j = 0; j < K; ++j) {
                        const int iw = in_coord(ow, j, g);
                        if (iw < 0 || iw >= is.w) continue;
                        for (int kk = 0; kk < K; ++kk) {
                            const int id = in_coord(od, kk, g);
                            if (id < 0 || id >= is.d) continue;
                            const T* xv = x.voxel(ih, iw, id);
                            const T* dt = D + static_cast<std::size_t>((i * K + j) * K + kk) * M;
                            for (int m = 0; m < M; ++m) yv[m] += xv[m] * dt[m];
                        }
                    }
                }
            }
        }
    }
    return y;
}

template <typename T>
BasicTensor4<T> depthwise3d_backward_input(const BasicTensor4<T>& dy, const DepthwiseKernel<T>& w,
                                           const ConvGeometry& g, const Shape4& input_shape) {
    w.validate();
    const Shape4 os = g.output_shape(input_shape, w.k, w.m);
    if (dy.shape() != os) {
        throw ShapeError("depthwise backward: upstream " + dy.shape().str() + " does not match output " +
                         os.str());
    }
    BasicTensor4<T> dx(input_shape.with_channels(w.m));
    const int K = w.k, M = w.m;
    const T* D = w.weights.data();

#pragma omp parallel for collapse(2) schedule(static)
    for (int ih = 0; ih < input_shape.h; ++ih) {
        for (int iw = 0; iw < input_shape.w; ++iw) {
            for (int id = 0; id < input_shape.d; ++id) {
                T* dxv = dx.voxel(ih, iw, id);
                for (int i = 0; i < K; ++i) {
                    const int oh = out_coord(ih, i, g, os.h);
                    if (oh < 0) continue;
                    for (int j = 0; j < K; ++j) {
                        const int ow = out_coord(iw, j, g, os.w);
                        if (ow < 0) continue;
                        for (int kk = 0; kk < K; ++kk) {
                            const int od = out_coord(id, kk, g, os.d);
                            if (od < 0) continue;
                            const T* dyv = dy.voxel(oh, ow, od);
                            const T* dt = D + static_cast<std::size_t>((i * K + j) * K + kk) * M;
                            for (int m = 0; m < M; ++m) dxv[m] += dyv[m] * dt[m];
                        }
                    }
                }
            }
        }
    }
    return dx;
}

template <typename T>
std::vector<T> depthwise3d_backward_weights(const BasicTensor4<T>& x, const BasicTensor4<T>& dy, int k,
                                            const ConvGeometry& g) {
    const Shape4& is = x.shape();
    const Shape4 os = g.output_shape(is, k, is.c);
    if (dy.shape() != os) {
        throw ShapeError("depthwise backward: upstream " + dy.shape().str() + " does not match output " +
                         os.str());
    }
    const int M = is.c;
    const int taps = k * k * k;
    std::vector<T> dd(static_cast<std::size_t>(taps) * M, T{0});

#pragma omp parallel for schedule(dynamic)
    for (int tap = 0; tap < taps; ++tap) {
        const int i = tap / (k * k), j = (tap / k) % k, kk = tap % k;
        T* dt = dd.data() + static_cast<std::size_t>(tap) * M;
        for (int oh = 0; oh < os.h; ++oh) {
            const int ih = in_coord(oh, i, g);
            if (ih < 0 || ih >= is.h) continue;
            for (int ow = 0; ow < os.w; ++ow) {
                const int iw = in_coord(ow, j, g);
                if (iw < 0 || iw >= is.w) continue;
                for (int od = 0; od < os.d; ++od) {
                    const int id = in_coord(od, kk, g);
                    if (id < 0 || id >= is.d) continue;
                    const T* xv = x.voxel(ih, iw, id);
                    const T* dyv = dy.voxel(oh, ow, od);
                    for (int m = 0; m < M; ++m) dt[m] += xv[m] * dyv[m];
                }
            }
        }
    }
    return dd;
}

template <typename T>
BasicTensor4<T> pointwise3d(const BasicTensor4<T>& x, const PointwiseKernel<T>& p) {
    p.validate();
    require_channels(x.channels(), p.m, "pointwise_conv3d");
    BasicTensor4<T> y(x.shape().with_channels(p.n));
    const int M = p.m, N = p.n;
    const std::ptrdiff_t voxels = static_cast<std::ptrdiff_t>(x.shape().voxels());
    const T* X = x.data().data();
    const T* P = p.weights.data();
    T* Y = y.data().data();

#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t v = 0; v < voxels; ++v) {
        const T* xv = X + v * M;
        T* yv = Y + v * N;
        for (int m = 0; m < M; ++m) {
            const T xm = xv[m];
            const T* pr = P + static_cast<std::size_t>(m) * N;
            for (int n = 0; n < N; ++n) yv[n] += xm * pr[n];
        }
    }
    return y;
}

template <typename T>
BasicTensor4<T> pointwise3d_backward_input(const BasicTensor4<T>& dy, const PointwiseKernel<T>& p) {
    p.validate();
    require_channels(dy.channels(), p.n, "pointwise backward");
    BasicTensor4<T> dx(dy.shape().with_channels(p.m));
    const int M = p.m, N = p.n;
    const std::ptrdiff_t voxels = static_cast<std::ptrdiff_t>(dy.shape().voxels());
    const T* DY = dy.data().data();
    const T* P = p.weights.data();
    T* DX = dx.data().data();

#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t v = 0; v < voxels; ++v) {
        const T* dyv = DY + v * N;
        T* dxv = DX + v * M;
        for (int m = 0; m < M; ++m) {
            const T* pr = P + static_cast<std::size_t>(m) * N;
            T acc = 0;
            for (int n = 0; n < N; ++n) acc += dyv[n] * pr[n];
            dxv[m] = acc;
        }
    }
    return dx;
}

template <typename T>
std::vector<T> pointwise3d_backward_weights(const BasicTensor4<T>& x, const BasicTensor4<T>& dy) {
    if (!x.shape().same_spatial(dy.shape())) {
        throw ShapeError("pointwise backward: " + x.shape().str() + " vs upstream " + dy.shape().str());
    }
    const int M = x.channels(), N = dy.channels();
    const std::ptrdiff_t voxels = static_cast<std::ptrdiff_t>(x.shape().voxels());
    const T* X = x.data().data();
    const T* DY = dy.data().data();
    std::vector<T> dp(static_cast<std::size_t>(M) * N, T{0});

#pragma omp parallel for schedule(static)
    for (int m = 0; m < M; ++m) {
        T* dr = dp.data() + static_cast<std::size_t>(m) * N;
        for (std::ptrdiff_t v = 0; v < voxels; ++v) {
            const T xm = X[v * M + m];
            const T* dyv = DY + v * N;
            for (int n = 0; n < N; ++n) dr[n] += xm * dyv[n];
        }
    }
    return dp;
}

namespace reference {

template <typename T>
BasicTensor4<T> conv3d(const BasicTensor4<T>& x, const ConvKernel<T>& w, const ConvGeometry& g,
                       std::uint64_t* macs) {
    w.validate();
    require_channels(x.channels(), w.m, "conv3d");
    const Shape4& is = x.shape();
    const Shape4 os = g.output_shape(is, w.k, w.n);
    BasicTensor4<T> y(os);
    std::uint64_t count = 0;
    for (int oh = 0; oh < os.h; ++oh)
        for (int ow = 0; ow < os.w; ++ow)
            for (int od = 0; od < os.d; ++od)
                for (int n = 0; n < w.n; ++n) {
                    T acc = 0;
                    for (int i = 0; i < w.k; ++i)
                        for (int j = 0; j < w.k; ++j)
                            for (int kk = 0; kk < w.k; ++kk)
                                for (int m = 0; m < w.m; ++m) {
                                    const int ih = in_coord(oh, i, g);
                                    const int iw = in_coord(ow, j, g);
                                    const int id = in_coord(od, kk, g);
                                    const bool inside = ih >= 0 && ih < is.h && iw >= 0 && iw < is.w &&
                                                        id >= 0 && id < is.d;
                                    const T xv = inside ? x(ih, iw, id, m) : T{0};
                                    const std::size_t widx =
                                        ((static_cast<std::size_t>((i * w.k + j) * w.k + kk) * w.m) + m) * w.n + n;
                                    acc += xv * w.weights[widx];
                                    ++count;
                                }
                    y(oh, ow, od, n) = acc;
                }
    if (macs) *macs += count;
    return y;
}

template <typename T>
BasicTensor4<T> depthwise3d(const BasicTensor4<T>& x, const DepthwiseKernel<T>& w, const ConvGeometry& g,
                            std::uint64_t* macs) {
    w.validate();
    require_channels(x.channels(), w.m, "depthwise_conv3d");
    const Shape4& is = x.shape();
    const Shape4 os = g.output_shape(is, w.k, w.m);
    BasicTensor4<T> y(os);
    std::uint64_t count = 0;
    for (int oh = 0; oh < os.h; ++oh)
        for (int ow = 0; ow < os.w; ++ow)
            for (int od = 0; od < os.d; ++od)
                for (int m = 0; m < w.m; ++m) {
                    T acc = 0;
                    for (int i = 0; i < w.k; ++i)
                        for (int j = 0; j < w.k; ++j)
                            for (int kk = 0; kk < w.k; ++kk) {
                                const int ih = in_coord(oh, i, g);
                                const int iw = in_coord(ow, j, g);
                                const int id = in_coord(od, kk, g);
                                const bool inside =
                                    ih >= 0 && ih < is.h && iw >= 0 && iw < is.w && id >= 0 && id < is.d;
                                const T xv = inside ? x(ih, iw, id, m) : T{0};
                                acc += xv * w.weights[static_cast<std::size_t>((i * w.k + j) * w.k + kk) * w.m + m];
                                ++count;
                            }
                    y(oh, ow, od, m) = acc;
                }
    if (macs) *macs += count;
    return y;
}

template <typename T>
BasicTensor4<T> pointwise3d(const BasicTensor4<T>& x, const PointwiseKernel<T>& p, std::uint64_t* macs) {
    p.validate();
    require_channels(x.channels(), p.m, "pointwise_conv3d");
    const Shape4& s = x.shape();
    BasicTensor4<T> y(s.with_channels(p.n));
    std::uint64_t count = 0;
    for (int h = 0; h < s.h; ++h)
        for (int w = 0; w < s.w; ++w)
            for (int d = 0; d < s.d; ++d)
                for (int n = 0; n < p.n; ++n) {
                    T acc = 0;
                    for (int m = 0; m < p.m; ++m) {
                        acc += x(h, w, d, m) * p.weights[static_cast<std::size_t>(m) * p.n + n];
                        ++count;
                    }
                    y(h, w, d, n) = acc;
                }
    if (macs) *macs += count;
    return y;
}

}  // namespace reference

#define PLSNET_INSTANTIATE(T)                                                                              \
    template BasicTensor4<T> conv3d(const BasicTensor4<T>&, const ConvKernel<T>&, const ConvGeometry&);    \
    template BasicTensor4<T> conv3d_backward_input(const BasicTensor4<T>&, const ConvKernel<T>&,           \
                                                   const ConvGeometry&, const Shape4&);                    \
    template std::vector<T> conv3d_backward_weights(const BasicTensor4<T>&, const BasicTensor4<T>&, int,   \
                                                    const ConvGeometry&);                                  \
    template BasicTensor4<T> depthwise3d(const BasicTensor4<T>&, const DepthwiseKernel<T>&,                \
                                         const ConvGeometry&);                                             \
    template BasicTensor4<T> depthwise3d_backward_input(const BasicTensor4<T>&, const DepthwiseKernel<T>&, \
                                                        const ConvGeometry&, const Shape4&);               \
    template std::vector<T> depthwise3d_backward_weights(const BasicTensor4<T>&, const BasicTensor4<T>&,   \
                                                         int, const ConvGeometry&);                        \
    template BasicTensor4<T> pointwise3d(const BasicTensor4<T>&, const PointwiseKernel<T>&);               \
    template BasicTensor4<T> pointwise3d_backward_input(const BasicTensor4<T>&, const PointwiseKernel<T>&); \
    template std::vector<T> pointwise3d_backward_weights(const BasicTensor4<T>&, const BasicTensor4<T>&);  \
    template BasicTensor4<T> reference::conv3d(const BasicTensor4<T>&, const ConvKernel<T>&,               \
                                               const ConvGeometry&, std::uint64_t*);                       \
    template BasicTensor4<T> reference::depthwise3d(const BasicTensor4<T>&, const DepthwiseKernel<T>&,     \
                                                    const ConvGeometry&, std::uint64_t*);                  \
    template BasicTensor4<T> reference::pointwise3d(const BasicTensor4<T>&, const PointwiseKernel<T>&,     \
                                                    std::uint64_t*);

PLSNET_INSTANTIATE(float)
PLSNET_INSTANTIATE(double)

#undef PLSNET_INSTANTIATE

}  // namespace kernels

template struct ConvKernel<float>;
template struct ConvKernel<double>;
template struct DepthwiseKernel<float>;
template struct DepthwiseKernel<double>;
template struct PointwiseKernel<float>;
template struct PointwiseKernel<double>;

}  // namespace plsnet
