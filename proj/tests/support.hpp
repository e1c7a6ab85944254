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

// Generators and independent oracles shared by the unit and acceptance tests.
// Nothing here calls into the code under test except to build inputs.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <limits>
#include <random>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include <unistd.h>

#include "plsnet/labels.hpp"
#include "plsnet/params.hpp"
#include "plsnet/tensor.hpp"

namespace plsnet::test {

class Gen {
public:
    explicit Gen(std::uint64_t seed) : rng_(seed) {}

    int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
    double real(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
    bool coin() { return integer(0, 1) == 1; }
    std::mt19937_64& engine() { return rng_; }

    template <typename T>
    std::vector<T> values(std::size_t n, double lo = -1.0, double hi = 1.0) {
        std::vector<T> v(n);
        for (auto& x : v) x = static_cast<T>(real(lo, hi));
        return v;
    }

    template <typename T>
    BasicTensor4<T> tensor(Shape4 s, double lo = -1.0, double hi = 1.0) {
        return BasicTensor4<T>(s, values<T>(s.size(), lo, hi));
    }

    LabeledVolume labels(Extents3 e, int classes, std::array<double, 3> spacing = {1.0, 1.0, 1.0}) {
        LabeledVolume v(e, spacing);
        for (auto& l : v.labels) l = static_cast<std::uint16_t>(integer(0, classes - 1));
        return v;
    }

private:
    std::mt19937_64 rng_;
};

// ---------------------------------------------------------------------------
// Convolution oracle: the defining sum, written out with explicit bounds
// checks, in double. Weights W[i][j][k][m][n].

inline std::vector<double> oracle_conv3d(const std::vector<double>& x, Shape4 xs, const std::vector<double>& w, int k,
                                         int n, int stride, int dilation, int padding, Shape4* out_shape) {
    auto extent = [&](int in) { return (in + 2 * padding - (dilation * (k - 1) + 1)) / stride + 1; };
    const Shape4 ys{extent(xs.h), extent(xs.w), extent(xs.d), n};
    std::vector<double> y(ys.size(), 0.0);
    const int m = xs.c;
    for (int oh = 0; oh < ys.h; ++oh)
        for (int ow = 0; ow < ys.w; ++ow)
            for (int od = 0; od < ys.d; ++od)
                for (int o = 0; o < n; ++o) {
                    double acc = 0.0;
                    for (int i = 0; i < k; ++i)
                        for (int j = 0; j < k; ++j)
                            for (int l = 0; l < k; ++l) {
                                const int ih = oh * stride - padding + i * dilation;
                                const int iw = ow * stride - padding + j * dilation;
                                const int id = od * stride - padding + l * dilation;
                                if (ih < 0 || iw < 0 || id < 0 || ih >= xs.h || iw >= xs.w || id >= xs.d) continue;
                                for (int c = 0; c < m; ++c) {
                                    const double xv = x[((static_cast<std::size_t>(ih) * xs.w + iw) * xs.d + id) * m + c];
                                    const double wv = w[((((static_cast<std::size_t>(i) * k + j) * k + l) * m + c) * n) + o];
                                    acc += xv * wv;
                                }
                            }
                    y[((static_cast<std::size_t>(oh) * ys.w + ow) * ys.d + od) * n + o] = acc;
                }
    if (out_shape) *out_shape = ys;
    return y;
}

// ---------------------------------------------------------------------------
// Central finite differences of a scalar function, in double.

inline double central_difference(const std::function<double()>& f, double& param, double step) {
    const double saved = param;
    param = saved + step;
    const double fp = f();
    param = saved - step;
    const double fm = f();
    param = saved;
    return (fp - fm) / (2.0 * step);
}

/// |a - b| / max(|a|, |b|, floor): relative error with an absolute floor so
/// gradients that are zero to rounding do not blow up the ratio.
inline double rel_error(double a, double b, double floor = 1e-6) {
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

/// Random linear functional L(y) = sum_i c_i y_i used to turn tensor outputs
/// into a scalar loss for gradient checks; upstream gradient is c.
template <typename T>
double dot(const std::vector<T>& a, const std::vector<T>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += static_cast<double>(a[i]) * static_cast<double>(b[i]);
    return s;
}

// ---------------------------------------------------------------------------
// Metric oracles: set arithmetic and all-pairs scans.

using Coord = std::tuple<int, int, int>;

inline std::set<Coord> voxel_set(const LabeledVolume& v, int label) {
    std::set<Coord> s;
    for (int h = 0; h < v.dims.h; ++h)
        for (int w = 0; w < v.dims.w; ++w)
            for (int d = 0; d < v.dims.d; ++d)
                if (v.at(h, w, d) == label) s.insert({h, w, d});
    return s;
}

inline double oracle_dsc(const LabeledVolume& a, const LabeledVolume& b, int label) {
    const auto sa = voxel_set(a, label);
    const auto sb = voxel_set(b, label);
    if (sa.empty() && sb.empty()) return 1.0;
    std::size_t both = 0;
    for (const auto& p : sa) both += sb.count(p);
    return 2.0 * static_cast<double>(both) / static_cast<double>(sa.size() + sb.size());
}

/// Members of the set with a 6-neighbour outside it; outside the grid counts
/// as outside the set.
inline std::vector<Coord> oracle_surface(const LabeledVolume& v, int label) {
    const auto s = voxel_set(v, label);
    std::vector<Coord> out;
    for (const auto& [h, w, d] : s) {
        const Coord nb[6] = {{h - 1, w, d}, {h + 1, w, d}, {h, w - 1, d}, {h, w + 1, d}, {h, w, d - 1}, {h, w, d + 1}};
        for (const auto& q : nb) {
            if (!s.count(q)) {
                out.push_back({h, w, d});
                break;
            }
        }
    }
    return out;  // std::set order is lexicographic == linear index order
}

inline double oracle_asd(const LabeledVolume& a, const LabeledVolume& b, int label) {
    const auto sa = oracle_surface(a, label);
    const auto sb = oracle_surface(b, label);
    const auto& sp = a.spacing;
    auto dist = [&](const Coord& p, const Coord& q) {
        const double x = (std::get<0>(p) - std::get<0>(q)) * sp[0];
        const double y = (std::get<1>(p) - std::get<1>(q)) * sp[1];
        const double z = (std::get<2>(p) - std::get<2>(q)) * sp[2];
        return std::sqrt(x * x + y * y + z * z);
    };
    auto side = [&](const std::vector<Coord>& from, const std::vector<Coord>& to) {
        double sum = 0.0;
        for (const auto& p : from) {
            double best = std::numeric_limits<double>::infinity();
            for (const auto& q : to) best = std::min(best, dist(p, q));
            sum += best;
        }
        return sum;
    };
    return (side(sa, sb) + side(sb, sa)) / static_cast<double>(sa.size() + sb.size());
}

// ---------------------------------------------------------------------------
// Parameter stores.

/// Moderate random values for every tensor, respecting each role's domain.
template <typename T>
void randomize(ParamStore<T>& store, Gen& g, double scale = 0.3) {
    for (auto& e : store.entries()) {
        for (T& v : e.value) {
            switch (e.role) {
                case ParamRole::kConvWeight: v = static_cast<T>(g.real(-scale, scale)); break;
                case ParamRole::kBnGamma: v = static_cast<T>(g.real(0.5, 1.5)); break;
                case ParamRole::kBnBeta: v = static_cast<T>(g.real(-0.2, 0.2)); break;
                case ParamRole::kBnRunningMean: v = static_cast<T>(g.real(-0.1, 0.1)); break;
                case ParamRole::kBnRunningVar: v = static_cast<T>(g.real(0.5, 1.5)); break;
            }
        }
    }
}

template <typename T>
/// Zero weights, BN shift and BN running mean on every dense-block projection,
/// so the projection outputs zero in both modes.
void zero_projections(ParamStore<T>& store) {
    for (auto& e : store.entries()) {
        const bool proj = e.name.find(".proj.pw") != std::string::npos ||
                          e.name.find(".proj.bn.beta") != std::string::npos ||
                          e.name.find(".proj.bn.running_mean") != std::string::npos;
        if (proj) std::fill(e.value.begin(), e.value.end(), T{0});
    }
}

/// Random labels biased toward background so surfaces vary in size.
inline LabeledVolume blobby(Gen& g, Extents3 e, int classes, std::array<double, 3> sp) {
    LabeledVolume v(e, sp);
    for (auto& l : v.labels) l = static_cast<std::uint16_t>(g.coin() ? 0 : g.integer(1, classes - 1));
    return v;
}

// ---------------------------------------------------------------------------

/// Fresh empty directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static int counter = 0;
        path_ = std::filesystem::temp_directory_path() /
                ("plsnet_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::string file(const std::string& name) const { return (path_ / name).string(); }

private:
    std::filesystem::path path_;
};

}  // namespace plsnet::test
