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
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "plsnet/config.hpp"
#include "plsnet/ops.hpp"
#include "plsnet/params.hpp"
#include "plsnet/tensor.hpp"

namespace plsnet {

inline constexpr std::size_t kNoParam = std::numeric_limits<std::size_t>::max();

enum class ConvKind {
    kRegular,    // k^3 x in x out
    kSeparable,  // k^3 depthwise on `in`, then in x out pointwise
    kPointwise,  // 1x1x1, in x out
};

/// One convolution, optionally followed by BN and ReLU. Holds indices into
/// the ParamStore it was registered with.
struct ConvUnit {
    std::string name;
    ConvKind kind = ConvKind::kSeparable;
    int k = 3;
    int in = 1;
    int out = 1;
    ConvGeometry geom;
    bool norm_act = true;

    std::size_t weight = kNoParam;     // regular
    std::size_t depthwise = kNoParam;  // separable
    std::size_t pointwise = kNoParam;  // separable, pointwise
    std::size_t gamma = kNoParam;
    std::size_t beta = kNoParam;
    std::size_t running_mean = kNoParam;
    std::size_t running_var = kNoParam;

    template <typename T>
    static ConvUnit create(ParamStore<T>& store, std::string name, ConvKind kind, int k, int in, int out,
                           ConvGeometry geom, bool norm_act);
};

/// Tensors one ConvUnit keeps for its backward pass. A checkpointed trace
/// holds only the convolution outputs (dw_out, conv_out) and the BN
/// statistics; input, bn_out and output are rebuilt before backward.
template <typename T>
struct UnitTrace {
    BasicTensor4<T> input;
    BasicTensor4<T> dw_out;
    BasicTensor4<T> conv_out;
    BasicTensor4<T> bn_out;
    BasicTensor4<T> output;
    BatchNormStats<T> stats;

    std::size_t buffers() const;
};

enum class TraceLevel {
    kFull,         // everything the backward pass reads
    kConvOutputs,  // convolution outputs + BN statistics only
};

template <typename T>
BasicTensor4<T> unit_forward(const ConvUnit& unit, ParamStore<T>& store, const BasicTensor4<T>& x, NormMode mode,
                             UnitTrace<T>* trace = nullptr, TraceLevel level = TraceLevel::kFull);

/// Rebuilds bn_out/output of a kConvOutputs trace (input must be set by the caller).
template <typename T>
void unit_recompute(const ConvUnit& unit, const ParamStore<T>& store, UnitTrace<T>& trace);

/// Accumulates parameter gradients into `grads` and returns d(input).
template <typename T>
BasicTensor4<T> unit_backward(const ConvUnit& unit, const ParamStore<T>& store, const UnitTrace<T>& trace,
                              const BasicTensor4<T>& dy, ParamGrads<T>& grads);

// ---------------------------------------------------------------------------
// Dilated residual dense block

/// g0 input/output channels, growth rate g, four 3x3x3 layers with the given
/// dilations. Layer i (0-based) maps g0 + i*g channels to g; the 1x1x1
/// projection maps g0 + 4g back to g0 and the block input is added to it.
struct DenseBlockConfig {
    int g0 = 1;
    int g = 12;
    std::array<int, 4> dilations{1, 2, 3, 4};
    bool separable = true;
    /// false: four sequential g0 -> g0 layers at dilation 1, no concatenation,
    /// no projection, no residual.
    bool dense = true;
};

struct DenseBlock {
    std::string name;
    DenseBlockConfig cfg;
    std::vector<ConvUnit> layers;
    std::optional<ConvUnit> projection;

    template <typename T>
    static DenseBlock create(ParamStore<T>& store, std::string name, const DenseBlockConfig& cfg);

    int concat_channels() const { return cfg.g0 + 4 * cfg.g; }
};

template <typename T>
struct BlockTrace {
    bool checkpointed = false;
    BasicTensor4<T> input;
    std::vector<UnitTrace<T>> layers;
    UnitTrace<T> projection;

    /// Feature-map buffers held for backward (per-channel statistics excluded).
    std::size_t retained_buffers() const;
    std::size_t retained_bytes() const;
};

/// Keeps every intermediate (concatenations, BN outputs, activations).
template <typename T>
BasicTensor4<T> drdb_forward(const DenseBlock& block, ParamStore<T>& store, const BasicTensor4<T>& x, NormMode mode,
                             BlockTrace<T>* trace = nullptr);

/// Same output bit for bit; the trace keeps only convolution outputs and the
/// backward pass recomputes concatenations, BN outputs and activations.
template <typename T>
BasicTensor4<T> drdb_forward_checkpointed(const DenseBlock& block, ParamStore<T>& store, const BasicTensor4<T>& x,
                                          NormMode mode, BlockTrace<T>* trace);

/// Works on either kind of trace. Returns d(input).
template <typename T>
BasicTensor4<T> drdb_backward(const DenseBlock& block, const ParamStore<T>& store, const BlockTrace<T>& trace,
                              const BasicTensor4<T>& dy, ParamGrads<T>& grads);

// ---------------------------------------------------------------------------
// Full network

template <typename T>
using FeatureSink = std::function<void(std::string_view name, const BasicTensor4<T>& maps)>;

/// Feature maps at levels 0..3 (full, 1/2, 1/4, 1/8 resolution).
template <typename T>
using LevelFeatures = std::array<BasicTensor4<T>, 4>;

template <typename T>
struct NetTrace {
    Shape4 input_shape;
    Shape4 padded_shape;
    UnitTrace<T> stem;
    struct Level {
        UnitTrace<T> down;
        std::vector<BlockTrace<T>> blocks;
    };
    std::array<Level, 3> levels;
    // Decoder, coarsest first.
    UnitTrace<T> coarse;                  // level-3 features -> 2C
    std::array<UnitTrace<T>, 3> skip;     // level 2, 1, 0 features -> 2C
    std::array<UnitTrace<T>, 2> merge;    // level 2, 1 merged 4C -> 2C
    std::array<Shape4, 3> upsample_from;  // shapes fed to each x2 upsample
    UnitTrace<T> head;
    BasicTensor4<T> probabilities;

    bool has_forward = false;
    std::size_t retained_buffers() const;
};

template <typename T>
class PlsNet {
public:
    /// Registers every parameter with zero weights and BN identity statistics.
    explicit PlsNet(const NetworkConfig& cfg);
    /// Adopts existing parameters; throws if names/shapes differ from `cfg`.
    PlsNet(const NetworkConfig& cfg, ParamStore<T> params);

    const NetworkConfig& config() const { return cfg_; }
    ParamStore<T>& params() { return store_; }
    const ParamStore<T>& params() const { return store_; }

    /// Dense blocks keep only convolution outputs when enabled.
    void set_checkpointing(bool on) { checkpointing_ = on; }
    bool checkpointing() const { return checkpointing_; }

    /// Single-channel volume in, C probability maps out (same spatial extents).
    /// Extents not divisible by 8 are zero-padded at the high end and the
    /// output is cropped back.
    BasicTensor4<T> forward(const BasicTensor4<T>& ct, NormMode mode, NetTrace<T>* trace = nullptr,
                            const FeatureSink<T>& sink = {});

    /// `ct` must already have extents divisible by 8.
    LevelFeatures<T> encoder_forward(const BasicTensor4<T>& ct, NormMode mode, NetTrace<T>* trace = nullptr,
                                     const FeatureSink<T>& sink = {});
    /// Returns logits (C channels) at level-0 resolution.
    BasicTensor4<T> decoder_forward(const LevelFeatures<T>& levels, NormMode mode, NetTrace<T>* trace = nullptr,
                                    const FeatureSink<T>& sink = {});

    /// Gradients of every parameter given d(loss)/d(probabilities).
    ParamGrads<T> backward(const NetTrace<T>& trace, const BasicTensor4<T>& dprob) const;
    /// Same, starting from d(loss)/d(logits) at the output extents.
    ParamGrads<T> backward_logits(const NetTrace<T>& trace, const BasicTensor4<T>& dlogits) const;

    /// Names accepted by a FeatureSink in forward order.
    std::vector<std::string> layer_names();

    const std::vector<DenseBlock>& blocks(int level) const { return blocks_.at(level - 1); }

private:
    void build();

    NetworkConfig cfg_;
    ParamStore<T> store_;
    bool checkpointing_ = false;

    ConvUnit stem_;
    std::array<ConvUnit, 3> down_;
    std::array<std::vector<DenseBlock>, 3> blocks_;
    ConvUnit coarse_;
    std::array<ConvUnit, 3> skip_;
    std::array<ConvUnit, 2> merge_;
    ConvUnit head_;
};

extern template class PlsNet<float>;
extern template class PlsNet<double>;

}  // namespace plsnet
