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

#include "plsnet/network.hpp"

#include <stdexcept>

namespace plsnet {

// ---------------------------------------------------------------------------
// ConvUnit

template <typename T>
ConvUnit ConvUnit::create(ParamStore<T>& store, std::string name, ConvKind kind, int k, int in, int out,
                          ConvGeometry geom, bool norm_act) {
    ConvUnit u;
    u.name = std::move(name);
    u.kind = kind;
    u.k = k;
    u.in = in;
    u.out = out;
    u.geom = geom;
    u.norm_act = norm_act;
    switch (kind) {
        case ConvKind::kRegular:
            u.weight = store.add(u.name + ".conv", {k, k, k, in, out}, ParamRole::kConvWeight);
            break;
        case ConvKind::kSeparable:
            u.depthwise = store.add(u.name + ".dw", {k, k, k, in}, ParamRole::kConvWeight);
            u.pointwise = store.add(u.name + ".pw", {in, out}, ParamRole::kConvWeight);
            break;
        case ConvKind::kPointwise:
            if (k != 1 || geom.stride != 1) throw std::invalid_argument("pointwise unit must be 1x1x1, stride 1");
            u.pointwise = store.add(u.name + ".pw", {in, out}, ParamRole::kConvWeight);
            break;
    }
    if (norm_act) {
        u.gamma = store.add(u.name + ".bn.gamma", {out}, ParamRole::kBnGamma, T{1});
        u.beta = store.add(u.name + ".bn.beta", {out}, ParamRole::kBnBeta, T{0});
        u.running_mean = store.add(u.name + ".bn.running_mean", {out}, ParamRole::kBnRunningMean, T{0});
        u.running_var = store.add(u.name + ".bn.running_var", {out}, ParamRole::kBnRunningVar, T{1});
    }
    return u;
}

template <typename T>
std::size_t UnitTrace<T>::buffers() const {
    std::size_t n = 0;
    for (const auto* t : {&input, &dw_out, &conv_out, &bn_out, &output}) {
        if (t->size() != 0) ++n;
    }
    return n;
}

namespace {

template <typename T>
ConvKernel<T> full_kernel(const ConvUnit& u, const ParamStore<T>& s) {
    return {u.k, u.in, u.out, s.values(u.weight)};
}
template <typename T>
DepthwiseKernel<T> dw_kernel(const ConvUnit& u, const ParamStore<T>& s) {
    return {u.k, u.in, s.values(u.depthwise)};
}
template <typename T>
PointwiseKernel<T> pw_kernel(const ConvUnit& u, const ParamStore<T>& s) {
    return {u.in, u.out, s.values(u.pointwise)};
}

// Tensors a unit's backward reads, by reference so recomputed pieces can be
// mixed with stored ones without copies.
template <typename T>
struct UnitTensors {
    const BasicTensor4<T>& input;
    const BasicTensor4<T>& dw_out;
    const BasicTensor4<T>& conv_out;
    const BasicTensor4<T>& bn_out;
    const BatchNormStats<T>& stats;
};

template <typename T>
BasicTensor4<T> unit_backward_impl(const ConvUnit& u, const ParamStore<T>& store, const UnitTensors<T>& t,
                                   const BasicTensor4<T>& dy, ParamGrads<T>& grads) {
    BasicTensor4<T> dc;
    if (u.norm_act) {
        const BasicTensor4<T> dbn = relu_backward(t.bn_out, dy);
        BatchNormGrads<T> g = batch_norm_backward(t.conv_out, t.stats, store.values(u.gamma), dbn);
        grads.add(u.gamma, g.gamma);
        grads.add(u.beta, g.beta);
        dc = std::move(g.input);
    } else {
        dc = dy;
    }
    switch (u.kind) {
        case ConvKind::kRegular: {
            ConvGrads<T> g = conv3d_backward(t.input, full_kernel(u, store), u.geom, dc);
            grads.add(u.weight, g.weights);
            return std::move(g.input);
        }
        case ConvKind::kSeparable: {
            ConvGrads<T> gp = pointwise_conv3d_backward(t.dw_out, pw_kernel(u, store), dc);
            grads.add(u.pointwise, gp.weights);
            ConvGrads<T> gd = depthwise_conv3d_backward(t.input, dw_kernel(u, store), u.geom, gp.input);
            grads.add(u.depthwise, gd.weights);
            return std::move(gd.input);
        }
        case ConvKind::kPointwise:
        default: {
            ConvGrads<T> g = pointwise_conv3d_backward(t.input, pw_kernel(u, store), dc);
            grads.add(u.pointwise, g.weights);
            return std::move(g.input);
        }
    }
}

}  // namespace

template <typename T>
BasicTensor4<T> unit_forward(const ConvUnit& u, ParamStore<T>& store, const BasicTensor4<T>& x, NormMode mode,
                             UnitTrace<T>* trace, TraceLevel level) {
    BasicTensor4<T> z;
    BasicTensor4<T> c;
    switch (u.kind) {
        case ConvKind::kRegular:
            c = conv3d(x, full_kernel(u, store), u.geom);
            break;
        case ConvKind::kSeparable:
            z = depthwise_conv3d(x, dw_kernel(u, store), u.geom);
            c = pointwise_conv3d(z, pw_kernel(u, store));
            break;
        case ConvKind::kPointwise:
            c = pointwise_conv3d(x, pw_kernel(u, store));
            break;
    }
    if (!u.norm_act) {
        if (trace) {
            *trace = UnitTrace<T>{};
            trace->input = x;
            trace->dw_out = std::move(z);
        }
        return c;
    }
    BatchNormStats<T> stats;
    const BatchNormRef<T> bn{store.values(u.gamma), store.values(u.beta), store.values(u.running_mean),
                             store.values(u.running_var)};
    BasicTensor4<T> b = batch_norm(c, bn, mode, &stats);
    BasicTensor4<T> y = relu(b);
    if (trace) {
        *trace = UnitTrace<T>{};
        trace->stats = std::move(stats);
        if (level == TraceLevel::kFull) {
            trace->input = x;
            trace->bn_out = std::move(b);
            trace->output = y;
        }
        trace->dw_out = std::move(z);
        trace->conv_out = std::move(c);
    }
    return y;
}

template <typename T>
void unit_recompute(const ConvUnit& u, const ParamStore<T>& store, UnitTrace<T>& trace) {
    if (!u.norm_act) {
        throw std::logic_error("unit_recompute: unit '" + u.name + "' has no normalisation to rebuild");
    }
    trace.bn_out = batch_norm_apply(trace.conv_out, trace.stats, store.values(u.gamma), store.values(u.beta));
    trace.output = relu(trace.bn_out);
}

template <typename T>
BasicTensor4<T> unit_backward(const ConvUnit& u, const ParamStore<T>& store, const UnitTrace<T>& trace,
                              const BasicTensor4<T>& dy, ParamGrads<T>& grads) {
    if (trace.input.size() == 0) {
        throw std::logic_error("unit_backward: missing saved input for '" + u.name + "'");
    }
    return unit_backward_impl(u, store, UnitTensors<T>{trace.input, trace.dw_out, trace.conv_out, trace.bn_out,
                                                       trace.stats},
                              dy, grads);
}

// ---------------------------------------------------------------------------
// Dense block

template <typename T>
DenseBlock DenseBlock::create(ParamStore<T>& store, std::string name, const DenseBlockConfig& cfg) {
    if (cfg.g0 < 1 || cfg.g < 1) throw std::invalid_argument("dense block: g0 and g must be >= 1");
    DenseBlock b;
    b.name = std::move(name);
    b.cfg = cfg;
    const ConvKind kind = cfg.separable ? ConvKind::kSeparable : ConvKind::kRegular;
    for (int i = 0; i < 4; ++i) {
        const std::string lname = b.name + ".layer" + std::to_string(i);
        if (cfg.dense) {
            b.layers.push_back(ConvUnit::create(store, lname, kind, 3, cfg.g0 + i * cfg.g, cfg.g,
                                                ConvGeometry::same(3, cfg.dilations[i]), true));
        } else {
            b.layers.push_back(ConvUnit::create(store, lname, kind, 3, cfg.g0, cfg.g0, ConvGeometry::same(3), true));
        }
    }
    if (cfg.dense) {
        b.projection = ConvUnit::create(store, b.name + ".proj", ConvKind::kPointwise, 1, b.concat_channels(), cfg.g0,
                                        ConvGeometry{}, true);
    }
    return b;
}

template <typename T>
std::size_t BlockTrace<T>::retained_buffers() const {
    std::size_t n = input.size() != 0 ? 1 : 0;
    for (const auto& l : layers) n += l.buffers();
    return n + projection.buffers();
}

template <typename T>
std::size_t BlockTrace<T>::retained_bytes() const {
    auto bytes = [](const UnitTrace<T>& u) {
        return (u.input.size() + u.dw_out.size() + u.conv_out.size() + u.bn_out.size() + u.output.size()) * sizeof(T);
    };
    std::size_t n = input.size() * sizeof(T);
    for (const auto& l : layers) n += bytes(l);
    return n + bytes(projection);
}

namespace {

template <typename T>
BasicTensor4<T> drdb_run(const DenseBlock& block, ParamStore<T>& store, const BasicTensor4<T>& x, NormMode mode,
                         BlockTrace<T>* trace, TraceLevel level) {
    if (x.channels() != block.cfg.g0) {
        throw ShapeError("dense block '" + block.name + "': input has " + std::to_string(x.channels()) +
                         " channels, expected " + std::to_string(block.cfg.g0));
    }
    if (trace) {
        *trace = BlockTrace<T>{};
        trace->checkpointed = level == TraceLevel::kConvOutputs;
        trace->input = x;
        trace->layers.resize(block.layers.size());
    }
    auto layer_trace = [&](std::size_t i) { return trace ? &trace->layers[i] : nullptr; };

    if (!block.cfg.dense) {
        BasicTensor4<T> e = x;
        for (std::size_t i = 0; i < block.layers.size(); ++i) {
            e = unit_forward(block.layers[i], store, e, mode, layer_trace(i), TraceLevel::kFull);
        }
        if (trace) trace->checkpointed = false;
        return e;
    }

    // X_i = H_{3,r_i}([X_0, ..., X_{i-1}])
    BasicTensor4<T> features = x;
    for (std::size_t i = 0; i < block.layers.size(); ++i) {
        BasicTensor4<T> xi = unit_forward(block.layers[i], store, features, mode, layer_trace(i), level);
        features = concat_channels(features, xi);
    }
    // X_DR = H_1([X_0, ..., X_4]); Y = X_DR + X_0
    BasicTensor4<T> reduced =
        unit_forward(*block.projection, store, features, mode, trace ? &trace->projection : nullptr, level);
    return add_elementwise(reduced, x);
}

}  // namespace

template <typename T>
BasicTensor4<T> drdb_forward(const DenseBlock& block, ParamStore<T>& store, const BasicTensor4<T>& x, NormMode mode,
                             BlockTrace<T>* trace) {
    return drdb_run(block, store, x, mode, trace, TraceLevel::kFull);
}

template <typename T>
BasicTensor4<T> drdb_forward_checkpointed(const DenseBlock& block, ParamStore<T>& store, const BasicTensor4<T>& x,
                                          NormMode mode, BlockTrace<T>* trace) {
    return drdb_run(block, store, x, mode, trace, TraceLevel::kConvOutputs);
}

template <typename T>
BasicTensor4<T> drdb_backward(const DenseBlock& block, const ParamStore<T>& store, const BlockTrace<T>& trace,
                              const BasicTensor4<T>& dy, ParamGrads<T>& grads) {
    if (trace.layers.size() != block.layers.size()) {
        throw std::logic_error("drdb_backward: missing saved state for '" + block.name + "'");
    }
    if (!block.cfg.dense) {
        BasicTensor4<T> d = dy;
        for (std::size_t i = block.layers.size(); i-- > 0;) {
            d = unit_backward(block.layers[i], store, trace.layers[i], d, grads);
        }
        return d;
    }

    const int g0 = block.cfg.g0;
    const int g = block.cfg.g;
    const std::size_t n = block.layers.size();

    // Layer outputs X_1..X_4 and BN outputs, from the trace or rebuilt.
    std::vector<BasicTensor4<T>> outputs(n);
    std::vector<BasicTensor4<T>> bn_outs(n);
    if (trace.checkpointed) {
        for (std::size_t i = 0; i < n; ++i) {
            const ConvUnit& u = block.layers[i];
            bn_outs[i] = batch_norm_apply(trace.layers[i].conv_out, trace.layers[i].stats, store.values(u.gamma),
                                          store.values(u.beta));
            outputs[i] = relu(bn_outs[i]);
        }
    }
    auto output_of = [&](std::size_t i) -> const BasicTensor4<T>& {
        return trace.checkpointed ? outputs[i] : trace.layers[i].output;
    };
    auto concat_upto = [&](std::size_t count) {
        BasicTensor4<T> f = trace.input;
        for (std::size_t i = 0; i < count; ++i) f = concat_channels(f, output_of(i));
        return f;
    };

    // Projection.
    BasicTensor4<T> dconcat;
    if (trace.checkpointed) {
        const ConvUnit& p = *block.projection;
        const BasicTensor4<T> xt = concat_upto(n);
        const BasicTensor4<T> bn = batch_norm_apply(trace.projection.conv_out, trace.projection.stats,
                                                    store.values(p.gamma), store.values(p.beta));
        dconcat = unit_backward_impl(p, store,
                                     UnitTensors<T>{xt, trace.projection.dw_out, trace.projection.conv_out, bn,
                                                    trace.projection.stats},
                                     dy, grads);
    } else {
        dconcat = unit_backward(*block.projection, store, trace.projection, dy, grads);
    }

    // d[0] is d(X_0); d[i + 1] is d(output of layer i).
    std::vector<BasicTensor4<T>> d(n + 1);
    d[0] = slice_channels(dconcat, 0, g0);
    for (std::size_t i = 0; i < n; ++i) d[i + 1] = slice_channels(dconcat, g0 + static_cast<int>(i) * g, g);

    for (std::size_t i = n; i-- > 0;) {
        const ConvUnit& u = block.layers[i];
        BasicTensor4<T> din;
        if (trace.checkpointed) {
            const BasicTensor4<T> xin = concat_upto(i);
            din = unit_backward_impl(u, store,
                                     UnitTensors<T>{xin, trace.layers[i].dw_out, trace.layers[i].conv_out, bn_outs[i],
                                                    trace.layers[i].stats},
                                     d[i + 1], grads);
        } else {
            din = unit_backward(u, store, trace.layers[i], d[i + 1], grads);
        }
        accumulate(d[0], slice_channels(din, 0, g0));
        for (std::size_t j = 0; j < i; ++j) {
            accumulate(d[j + 1], slice_channels(din, g0 + static_cast<int>(j) * g, g));
        }
    }
    // Residual path.
    accumulate(d[0], dy);
    return std::move(d[0]);
}

// ---------------------------------------------------------------------------
// NetTrace

template <typename T>
std::size_t NetTrace<T>::retained_buffers() const {
    std::size_t n = stem.buffers() + coarse.buffers() + head.buffers();
    for (const auto& l : levels) {
        n += l.down.buffers();
        for (const auto& b : l.blocks) n += b.retained_buffers();
    }
    for (const auto& s : skip) n += s.buffers();
    for (const auto& m : merge) n += m.buffers();
    return n;
}

// ---------------------------------------------------------------------------
// PlsNet

template <typename T>
PlsNet<T>::PlsNet(const NetworkConfig& cfg) : cfg_(cfg) {
    cfg_.validate();
    build();
}

template <typename T>
PlsNet<T>::PlsNet(const NetworkConfig& cfg, ParamStore<T> params) : cfg_(cfg) {
    cfg_.validate();
    build();
    if (!store_.same_layout(params)) {
        throw std::invalid_argument("parameter store does not match the network configuration");
    }
    store_ = std::move(params);
}

template <typename T>
void PlsNet<T>::build() {
    const ConvKind kind = cfg_.depthwise_separable ? ConvKind::kSeparable : ConvKind::kRegular;
    const int c2 = cfg_.decoder_width();

    stem_ = ConvUnit::create(store_, "stem", kind, 3, 1, cfg_.stem_channels, ConvGeometry::same(3), true);
    int prev = cfg_.stem_channels;
    for (int l = 1; l <= 3; ++l) {
        const std::string lname = "enc.l" + std::to_string(l);
        down_[l - 1] = ConvUnit::create(store_, lname + ".down", kind, 3, prev, cfg_.level_channels[l - 1],
                                        ConvGeometry{2, 1, 1}, true);
        const int width = cfg_.level_width(l);
        blocks_[l - 1].clear();
        for (int b = 0; b < cfg_.blocks_per_level[l - 1]; ++b) {
            DenseBlockConfig bc{width, cfg_.growth_rate, cfg_.dilations, cfg_.depthwise_separable, cfg_.dense_blocks};
            blocks_[l - 1].push_back(DenseBlock::create(store_, lname + ".block" + std::to_string(b), bc));
        }
        prev = width;
    }
    coarse_ = ConvUnit::create(store_, "dec.l3.conv", kind, 3, cfg_.level_width(3), c2, ConvGeometry::same(3), true);
    for (int s = 0; s < 3; ++s) {
        const int l = 2 - s;
        skip_[s] = ConvUnit::create(store_, "dec.l" + std::to_string(l) + ".skip", kind, 3, cfg_.level_width(l), c2,
                                    ConvGeometry::same(3), true);
    }
    for (int s = 0; s < 2; ++s) {
        merge_[s] = ConvUnit::create(store_, "dec.l" + std::to_string(2 - s) + ".merge", kind, 3, 2 * c2, c2,
                                     ConvGeometry::same(3), true);
    }
    head_ = ConvUnit::create(store_, "head", ConvKind::kPointwise, 1, 2 * c2, cfg_.classes, ConvGeometry{}, false);
}

template <typename T>
LevelFeatures<T> PlsNet<T>::encoder_forward(const BasicTensor4<T>& ct, NormMode mode, NetTrace<T>* trace,
                                            const FeatureSink<T>& sink) {
    const Shape4& s = ct.shape();
    if (s.c != 1) throw ShapeError("network input must have one channel, got " + s.str());
    if (s.h % 8 || s.w % 8 || s.d % 8) {
        throw ShapeError("encoder input extents must be divisible by 8, got " + s.str());
    }
    auto emit = [&](std::string_view name, const BasicTensor4<T>& t) {
        if (sink) sink(name, t);
    };

    LevelFeatures<T> feats;
    feats[0] = unit_forward(stem_, store_, ct, mode, trace ? &trace->stem : nullptr);
    emit("stem", feats[0]);
    for (int l = 1; l <= 3; ++l) {
        const std::string lname = "enc.l" + std::to_string(l);
        auto* lt = trace ? &trace->levels[l - 1] : nullptr;
        BasicTensor4<T> d = unit_forward(down_[l - 1], store_, feats[l - 1], mode, lt ? &lt->down : nullptr);
        emit(lname + ".down", d);
        BasicTensor4<T> e;
        if (cfg_.input_reinforcement) {
            const Shape4& ds = d.shape();
            e = concat_channels(d, trilinear_resample(ct, ds.h, ds.w, ds.d));
            emit(lname + ".ir", e);
        } else {
            e = std::move(d);
        }
        const auto& blocks = blocks_[l - 1];
        if (lt) lt->blocks.assign(blocks.size(), BlockTrace<T>{});
        for (std::size_t b = 0; b < blocks.size(); ++b) {
            BlockTrace<T>* bt = lt ? &lt->blocks[b] : nullptr;
            e = (checkpointing_ && bt) ? drdb_forward_checkpointed(blocks[b], store_, e, mode, bt)
                                       : drdb_forward(blocks[b], store_, e, mode, bt);
            emit(blocks[b].name, e);
        }
        feats[l] = std::move(e);
    }
    return feats;
}

template <typename T>
BasicTensor4<T> PlsNet<T>::decoder_forward(const LevelFeatures<T>& levels, NormMode mode, NetTrace<T>* trace,
                                           const FeatureSink<T>& sink) {
    for (int l = 0; l <= 3; ++l) {
        if (levels[l].channels() != cfg_.level_width(l)) {
            throw ShapeError("decoder: level " + std::to_string(l) + " has " + levels[l].shape().str() +
                             ", expected " + std::to_string(cfg_.level_width(l)) + " channels");
        }
        if (l < 3) {
            const Shape4& fine = levels[l].shape();
            const Shape4& coarse = levels[l + 1].shape();
            if (fine.h != 2 * coarse.h || fine.w != 2 * coarse.w || fine.d != 2 * coarse.d) {
                throw ShapeError("decoder: level " + std::to_string(l) + " " + fine.str() +
                                 " is not twice level " + std::to_string(l + 1) + " " + coarse.str());
            }
        }
    }
    auto emit = [&](std::string_view name, const BasicTensor4<T>& t) {
        if (sink) sink(name, t);
    };

    BasicTensor4<T> a = unit_forward(coarse_, store_, levels[3], mode, trace ? &trace->coarse : nullptr);
    emit("dec.l3.conv", a);
    for (int s = 0; s < 3; ++s) {
        const int l = 2 - s;
        const std::string lname = "dec.l" + std::to_string(l);
        const Shape4& target = levels[l].shape();
        if (trace) trace->upsample_from[s] = a.shape();
        BasicTensor4<T> up = trilinear_resample(a, target.h, target.w, target.d);
        emit(lname + ".up", up);
        BasicTensor4<T> b = unit_forward(skip_[s], store_, levels[l], mode, trace ? &trace->skip[s] : nullptr);
        emit(lname + ".skip", b);
        BasicTensor4<T> merged = concat_channels(up, b);
        if (s < 2) {
            a = unit_forward(merge_[s], store_, merged, mode, trace ? &trace->merge[s] : nullptr);
            emit(lname + ".merge", a);
        } else {
            BasicTensor4<T> logits = unit_forward(head_, store_, merged, mode, trace ? &trace->head : nullptr);
            emit("head", logits);
            return logits;
        }
    }
    throw std::logic_error("unreachable");
}

template <typename T>
BasicTensor4<T> PlsNet<T>::forward(const BasicTensor4<T>& ct, NormMode mode, NetTrace<T>* trace,
                                   const FeatureSink<T>& sink) {
    const Shape4 in = ct.shape();
    if (in.c != 1) throw ShapeError("network input must have one channel, got " + in.str());
    auto up8 = [](int v) { return (v + 7) / 8 * 8; };
    const Shape4 padded{up8(in.h), up8(in.w), up8(in.d), 1};
    if (trace) {
        *trace = NetTrace<T>{};
        trace->input_shape = in;
        trace->padded_shape = padded;
    }
    const bool needs_pad = padded != in;
    const LevelFeatures<T> feats =
        encoder_forward(needs_pad ? pad_to(ct, padded.h, padded.w, padded.d) : ct, mode, trace, sink);
    BasicTensor4<T> logits = decoder_forward(feats, mode, trace, sink);
    if (needs_pad) logits = crop_to(logits, in.h, in.w, in.d);
    BasicTensor4<T> prob = softmax_channels(logits);
    if (sink) sink("probabilities", prob);
    if (trace) {
        trace->probabilities = prob;
        trace->has_forward = true;
    }
    return prob;
}

template <typename T>
ParamGrads<T> PlsNet<T>::backward(const NetTrace<T>& trace, const BasicTensor4<T>& dprob) const {
    if (!trace.has_forward) throw std::logic_error("backward: no saved forward state");
    return backward_logits(trace, softmax_backward(trace.probabilities, dprob));
}

template <typename T>
ParamGrads<T> PlsNet<T>::backward_logits(const NetTrace<T>& trace, const BasicTensor4<T>& dlogits) const {
    if (!trace.has_forward) throw std::logic_error("backward: no saved forward state");
    if (dlogits.shape() != trace.probabilities.shape()) {
        throw ShapeError("backward: upstream " + dlogits.shape().str() + " vs output " +
                         trace.probabilities.shape().str());
    }
    ParamGrads<T> grads(store_);
    const Shape4& p = trace.padded_shape;
    const int c2 = cfg_.decoder_width();

    BasicTensor4<T> dm = unit_backward(head_, store_, trace.head,
                                       p != trace.input_shape.with_channels(1) ? pad_to(dlogits, p.h, p.w, p.d)
                                                                                : dlogits,
                                       grads);
    std::array<BasicTensor4<T>, 4> dfeat;
    for (int s = 2; s >= 0; --s) {
        const int l = 2 - s;
        dfeat[l] = unit_backward(skip_[s], store_, trace.skip[s], slice_channels(dm, c2, c2), grads);
        const BasicTensor4<T> da = trilinear_resample_backward(slice_channels(dm, 0, c2), trace.upsample_from[s]);
        if (s > 0) {
            dm = unit_backward(merge_[s - 1], store_, trace.merge[s - 1], da, grads);
        } else {
            dfeat[3] = unit_backward(coarse_, store_, trace.coarse, da, grads);
        }
    }

    BasicTensor4<T> df = std::move(dfeat[3]);
    for (int l = 3; l >= 1; --l) {
        const auto& lt = trace.levels[l - 1];
        const auto& blocks = blocks_[l - 1];
        if (lt.blocks.size() != blocks.size()) throw std::logic_error("backward: missing block state");
        for (std::size_t b = blocks.size(); b-- > 0;) {
            df = drdb_backward(blocks[b], store_, lt.blocks[b], df, grads);
        }
        const BasicTensor4<T> dd =
            cfg_.input_reinforcement ? slice_channels(df, 0, cfg_.level_channels[l - 1]) : df;
        BasicTensor4<T> dprev = unit_backward(down_[l - 1], store_, lt.down, dd, grads);
        accumulate(dprev, dfeat[l - 1]);
        df = std::move(dprev);
    }
    unit_backward(stem_, store_, trace.stem, df, grads);
    return grads;
}

template <typename T>
std::vector<std::string> PlsNet<T>::layer_names() {
    std::vector<std::string> names;
    const BasicTensor4<T> probe(Shape4{8, 8, 8, 1});
    forward(probe, NormMode::kInfer, nullptr,
            [&](std::string_view name, const BasicTensor4<T>&) { names.emplace_back(name); });
    return names;
}

#define PLSNET_INSTANTIATE(T)                                                                                        \
    template ConvUnit ConvUnit::create(ParamStore<T>&, std::string, ConvKind, int, int, int, ConvGeometry, bool);    \
    template struct UnitTrace<T>;                                                                                    \
    template BasicTensor4<T> unit_forward(const ConvUnit&, ParamStore<T>&, const BasicTensor4<T>&, NormMode,         \
                                          UnitTrace<T>*, TraceLevel);                                                \
    template void unit_recompute(const ConvUnit&, const ParamStore<T>&, UnitTrace<T>&);                              \
    template BasicTensor4<T> unit_backward(const ConvUnit&, const ParamStore<T>&, const UnitTrace<T>&,               \
                                           const BasicTensor4<T>&, ParamGrads<T>&);                                  \
    template DenseBlock DenseBlock::create(ParamStore<T>&, std::string, const DenseBlockConfig&);                    \
    template struct BlockTrace<T>;                                                                                   \
    template BasicTensor4<T> drdb_forward(const DenseBlock&, ParamStore<T>&, const BasicTensor4<T>&, NormMode,       \
                                          BlockTrace<T>*);                                                           \
    template BasicTensor4<T> drdb_forward_checkpointed(const DenseBlock&, ParamStore<T>&, const BasicTensor4<T>&,    \
                                                       NormMode, BlockTrace<T>*);                                    \
    template BasicTensor4<T> drdb_backward(const DenseBlock&, const ParamStore<T>&, const BlockTrace<T>&,            \
                                           const BasicTensor4<T>&, ParamGrads<T>&);                                  \
    template struct NetTrace<T>;                                                                                     \
    template class PlsNet<T>;

PLSNET_INSTANTIATE(float)
PLSNET_INSTANTIATE(double)

#undef PLSNET_INSTANTIATE

}  // namespace plsnet
