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
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "plsnet/config.hpp"
#include "plsnet/labels.hpp"

namespace plsnet {

enum class LayerKind {
    kRegularConv,
    kDsConv,
    kPointwise,
    kUpsample,  // any trilinear resample
    kConcat,
    kAdd,
    kBatchNorm,
    kRelu,
    kSoftmax,
};

std::string_view layer_kind_name(LayerKind kind);
/// Inverse of layer_kind_name; throws std::invalid_argument.
LayerKind parse_layer_kind(std::string_view name);

/// k, m (input channels), n (output channels), stride and dilation as in the
/// convolution kernels; `out` is the output spatial extent. BN uses n as its
/// channel count.
struct LayerSpec {
    std::string name;
    LayerKind kind = LayerKind::kRegularConv;
    int k = 1;
    int m = 1;
    int n = 1;
    int stride = 1;
    int dilation = 1;
    Extents3 out;
};

struct LayerCost {
    std::uint64_t macs = 0;
    std::uint64_t params = 0;
};

/// regular: K^3*M*N*V MACs, K^3*M*N params; separable: M*V*(K^3+N), M*(K^3+N);
/// pointwise: M*N*V, M*N (V = output voxels). BN holds 2N trainable
/// parameters (gamma, beta). Everything else is 0/0. Throws
/// std::invalid_argument for an unknown kind or non-positive sizes.
LayerCost count_layer(const LayerSpec& spec);

/// Non-negative fraction in lowest terms.
struct Rational {
    std::uint64_t num = 0;
    std::uint64_t den = 1;

    static Rational make(std::uint64_t num, std::uint64_t den);
    double value() const { return static_cast<double>(num) / static_cast<double>(den); }
    std::string str() const { return std::to_string(num) + "/" + std::to_string(den); }
    friend bool operator==(const Rational&, const Rational&) = default;
};

/// Regular-over-separable cost ratio for one layer: K^3*N / (K^3 + N).
Rational ds_reduction_factor(int k, int n);

struct CostRow {
    LayerSpec spec;
    LayerCost cost;
    int rf = 1;  // receptive field along the deepest path into this layer
};

struct CostReport {
    Extents3 input;
    std::vector<CostRow> rows;
    std::uint64_t total_macs = 0;
    std::uint64_t total_params = 0;
    // Same network with every separable convolution made regular.
    std::uint64_t regular_macs = 0;
    std::uint64_t regular_params = 0;
    Rational mac_reduction;
    Rational param_reduction;
    // ds_reduction_factor(3, growth_rate): one dense-block layer in isolation.
    Rational layer_reduction;
};

/// The exact layer sequence PlsNet instantiates for `cfg`, evaluated at
/// `input` (padded up to a multiple of 8, as the network does).
std::vector<CostRow> network_layers(const NetworkConfig& cfg, Extents3 input);

CostReport network_cost_report(const NetworkConfig& cfg, Extents3 input);

std::string format_cost_report(const CostReport& report);
nlohmann::json cost_report_json(const CostReport& report);

// ---------------------------------------------------------------------------
// Receptive field

struct RfLayer {
    int k = 3;
    int stride = 1;
    int dilation = 1;
};

/// rf += dilation*(k-1)*jump; jump *= stride, starting from rf = jump = 1.
int receptive_field(const std::vector<RfLayer>& layers);

/// Path counts from one output unit back to the input of a stride-1 stack
/// of k^3 kernels. Cubic, odd extent, centred on the output unit.
struct FootprintGrid {
    int extent = 1;
    std::vector<std::uint64_t> counts;

    std::uint64_t at(int x, int y, int z) const {
        return counts[(static_cast<std::size_t>(x) * extent + y) * extent + z];
    }
    /// Edge length of the bounding cube of the nonzero counts.
    int footprint_extent() const;
    /// True if a zero count lies strictly inside that bounding cube.
    bool has_holes() const;
};

struct GriddingResult {
    FootprintGrid grid;
    bool holes = false;
};

GriddingResult gridding_coverage(const std::vector<int>& dilations, int k = 3);

}  // namespace plsnet
