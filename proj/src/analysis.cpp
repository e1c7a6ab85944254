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

#include "plsnet/analysis.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "plsnet/kernels.hpp"

namespace plsnet {

namespace {

constexpr std::array<std::pair<LayerKind, std::string_view>, 9> kKindNames{{
    {LayerKind::kRegularConv, "regular-conv"},
    {LayerKind::kDsConv, "ds-conv"},
    {LayerKind::kPointwise, "pointwise"},
    {LayerKind::kUpsample, "upsample"},
    {LayerKind::kConcat, "concat"},
    {LayerKind::kAdd, "add"},
    {LayerKind::kBatchNorm, "bn"},
    {LayerKind::kRelu, "relu"},
    {LayerKind::kSoftmax, "softmax"},
}};

std::uint64_t u64(int v) { return static_cast<std::uint64_t>(v); }

}  // namespace

std::string_view layer_kind_name(LayerKind kind) {
    for (const auto& [k, name] : kKindNames) {
        if (k == kind) return name;
    }
    throw std::invalid_argument("unknown layer kind " + std::to_string(static_cast<int>(kind)));
}

LayerKind parse_layer_kind(std::string_view name) {
    for (const auto& [k, n] : kKindNames) {
        if (n == name) return k;
    }
    throw std::invalid_argument("unknown layer kind '" + std::string(name) + "'");
}

LayerCost count_layer(const LayerSpec& s) {
    const auto positive = [&](int v, const char* field) {
        if (v < 1) throw std::invalid_argument("layer '" + s.name + "': " + field + " must be >= 1");
    };
    positive(s.out.h, "output extent");
    positive(s.out.w, "output extent");
    positive(s.out.d, "output extent");
    const std::uint64_t vox = s.out.voxels();
    switch (s.kind) {
        case LayerKind::kRegularConv: {
            positive(s.k, "k");
            positive(s.m, "m");
            positive(s.n, "n");
            const std::uint64_t k3 = u64(s.k) * u64(s.k) * u64(s.k);
            return {k3 * u64(s.m) * vox * u64(s.n), k3 * u64(s.m) * u64(s.n)};
        }
        case LayerKind::kDsConv: {
            positive(s.k, "k");
            positive(s.m, "m");
            positive(s.n, "n");
            const std::uint64_t k3 = u64(s.k) * u64(s.k) * u64(s.k);
            return {u64(s.m) * vox * (k3 + u64(s.n)), u64(s.m) * (k3 + u64(s.n))};
        }
        case LayerKind::kPointwise:
            positive(s.m, "m");
            positive(s.n, "n");
            return {u64(s.m) * u64(s.n) * vox, u64(s.m) * u64(s.n)};
        case LayerKind::kBatchNorm:
            positive(s.n, "n");
            return {0, 2 * u64(s.n)};
        case LayerKind::kUpsample:
        case LayerKind::kConcat:
        case LayerKind::kAdd:
        case LayerKind::kRelu:
        case LayerKind::kSoftmax:
            return {0, 0};
    }
    throw std::invalid_argument("layer '" + s.name + "': unknown kind " + std::to_string(static_cast<int>(s.kind)));
}

Rational Rational::make(std::uint64_t num, std::uint64_t den) {
    if (den == 0) throw std::invalid_argument("Rational: zero denominator");
    const std::uint64_t g = std::gcd(num, den);
    return g == 0 ? Rational{0, 1} : Rational{num / g, den / g};
}

Rational ds_reduction_factor(int k, int n) {
    if (k < 1 || n < 1) throw std::invalid_argument("ds_reduction_factor: k and n must be >= 1");
    const std::uint64_t k3 = u64(k) * u64(k) * u64(k);
    return Rational::make(k3 * u64(n), k3 + u64(n));
}

// ---------------------------------------------------------------------------
// Layer enumeration

namespace {

class LayerListBuilder {
public:
    explicit LayerListBuilder(const NetworkConfig& cfg) : cfg_(cfg) {}

    struct Path {
        Extents3 ext;
        int rf = 1;
        int jump = 1;
    };

    // Mirrors ConvUnit: convolution, then BN + ReLU when norm_act.
    Path conv(const std::string& name, LayerKind kind, int k, int m, int n, ConvGeometry g, Path in,
              bool norm_act = true) {
        Path out{{g.output_extent(in.ext.h, k), g.output_extent(in.ext.w, k), g.output_extent(in.ext.d, k)},
                 in.rf + g.dilation * (k - 1) * in.jump, in.jump * g.stride};
        push(name, kind, k, m, n, g.stride, g.dilation, out);
        if (norm_act) {
            push(name + ".bn", LayerKind::kBatchNorm, 1, n, n, 1, 1, out);
            push(name + ".relu", LayerKind::kRelu, 1, n, n, 1, 1, out);
        }
        return out;
    }

    void push(const std::string& name, LayerKind kind, int k, int m, int n, int stride, int dilation,
              const Path& at) {
        LayerSpec s{name, kind, k, m, n, stride, dilation, at.ext};
        rows_.push_back({s, count_layer(s), at.rf});
    }

    std::vector<CostRow> take() { return std::move(rows_); }

private:
    const NetworkConfig& cfg_;
    std::vector<CostRow> rows_;
};

}  // namespace

std::vector<CostRow> network_layers(const NetworkConfig& cfg, Extents3 input) {
    cfg.validate();
    if (input.h < 1 || input.w < 1 || input.d < 1) throw std::invalid_argument("input extents must be >= 1");
    auto up8 = [](int v) { return (v + 7) / 8 * 8; };
    const Extents3 padded{up8(input.h), up8(input.w), up8(input.d)};

    using Path = LayerListBuilder::Path;
    LayerListBuilder b(cfg);
    const LayerKind conv3 = cfg.depthwise_separable ? LayerKind::kDsConv : LayerKind::kRegularConv;
    const ConvGeometry same3 = ConvGeometry::same(3);

    std::array<Path, 4> level;
    level[0] = b.conv("stem", conv3, 3, 1, cfg.stem_channels, same3, Path{padded});
    int prev = cfg.stem_channels;
    for (int l = 1; l <= 3; ++l) {
        const std::string lname = "enc.l" + std::to_string(l);
        const int c = cfg.level_channels[l - 1];
        Path p = b.conv(lname + ".down", conv3, 3, prev, c, ConvGeometry{2, 1, 1}, level[l - 1]);
        const int g0 = cfg.level_width(l);
        if (cfg.input_reinforcement) {
            b.push(lname + ".ir", LayerKind::kUpsample, 1, 1, 1, 1, 1, p);
            b.push(lname + ".ir.concat", LayerKind::kConcat, 1, c + 1, g0, 1, 1, p);
        }
        for (int blk = 0; blk < cfg.blocks_per_level[l - 1]; ++blk) {
            const std::string bname = lname + ".block" + std::to_string(blk);
            const int g = cfg.growth_rate;
            Path q = p;
            for (int i = 0; i < 4; ++i) {
                const std::string name = bname + ".layer" + std::to_string(i);
                if (cfg.dense_blocks) {
                    q = b.conv(name, conv3, 3, g0 + i * g, g, ConvGeometry::same(3, cfg.dilations[i]), q);
                    b.push(name + ".concat", LayerKind::kConcat, 1, g0 + i * g, g0 + (i + 1) * g, 1, 1, q);
                } else {
                    q = b.conv(name, conv3, 3, g0, g0, same3, q);
                }
            }
            if (cfg.dense_blocks) {
                q = b.conv(bname + ".proj", LayerKind::kPointwise, 1, g0 + 4 * g, g0, ConvGeometry{}, q);
                b.push(bname + ".add", LayerKind::kAdd, 1, g0, g0, 1, 1, q);
            }
            p = q;
        }
        level[l] = p;
        prev = g0;
    }

    const int c2 = cfg.decoder_width();
    Path a = b.conv("dec.l3.conv", conv3, 3, cfg.level_width(3), c2, same3, level[3]);
    for (int l = 2; l >= 0; --l) {
        const std::string lname = "dec.l" + std::to_string(l);
        // Linear x2 interpolation reaches one coarse step further.
        Path up{level[l].ext, a.rf + a.jump, a.jump / 2};
        b.push(lname + ".up", LayerKind::kUpsample, 1, c2, c2, 1, 1, up);
        const Path skip = b.conv(lname + ".skip", conv3, 3, cfg.level_width(l), c2, same3, level[l]);
        Path merged{level[l].ext, std::max(up.rf, skip.rf), up.jump};
        b.push(lname + ".concat", LayerKind::kConcat, 1, 2 * c2, 2 * c2, 1, 1, merged);
        if (l > 0) {
            a = b.conv(lname + ".merge", conv3, 3, 2 * c2, c2, same3, merged);
        } else {
            a = b.conv("head", LayerKind::kPointwise, 1, 2 * c2, cfg.classes, ConvGeometry{}, merged, false);
        }
    }
    // Padding is cropped before the softmax.
    a.ext = input;
    b.push("softmax", LayerKind::kSoftmax, 1, cfg.classes, cfg.classes, 1, 1, a);
    return b.take();
}

CostReport network_cost_report(const NetworkConfig& cfg, Extents3 input) {
    CostReport r;
    r.input = input;
    r.rows = network_layers(cfg, input);
    for (const auto& row : r.rows) {
        r.total_macs += row.cost.macs;
        r.total_params += row.cost.params;
    }
    NetworkConfig twin = cfg;
    twin.depthwise_separable = false;
    for (const auto& row : network_layers(twin, input)) {
        r.regular_macs += row.cost.macs;
        r.regular_params += row.cost.params;
    }
    r.mac_reduction = Rational::make(r.regular_macs, r.total_macs);
    r.param_reduction = Rational::make(r.regular_params, r.total_params);
    r.layer_reduction = ds_reduction_factor(3, cfg.growth_rate);
    return r;
}

namespace {

std::string grouped(std::uint64_t v) {
    std::string s = std::to_string(v);
    for (int i = static_cast<int>(s.size()) - 3; i > 0; i -= 3) s.insert(static_cast<std::size_t>(i), ",");
    return s;
}

std::string fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

}  // namespace

std::string format_cost_report(const CostReport& r) {
    std::size_t name_w = 5;
    for (const auto& row : r.rows) name_w = std::max(name_w, row.spec.name.size());
    std::ostringstream os;
    char line[512];
    std::snprintf(line, sizeof line, "%-*s  %-12s %2s %4s %4s %2s %2s %13s %18s %9s %4s\n", static_cast<int>(name_w),
                  "layer", "kind", "k", "m", "n", "s", "r", "output", "macs", "params", "rf");
    os << line;
    for (const auto& row : r.rows) {
        const LayerSpec& s = row.spec;
        std::snprintf(line, sizeof line, "%-*s  %-12s %2d %4d %4d %2d %2d %13s %18s %9s %4d\n",
                      static_cast<int>(name_w), s.name.c_str(), std::string(layer_kind_name(s.kind)).c_str(), s.k,
                      s.m, s.n, s.stride, s.dilation, s.out.str().c_str(), grouped(row.cost.macs).c_str(),
                      grouped(row.cost.params).c_str(), row.rf);
        os << line;
    }
    os << "\ninput: " << r.input.str() << "\n";
    os << "total params: " << grouped(r.total_params) << " (" << fixed(r.total_params / 1e6, 3) << "M)\n";
    os << "total MACs: " << grouped(r.total_macs) << " (" << fixed(r.total_macs / 1e9, 2) << "B)\n";
    os << "regular-conv twin: params " << grouped(r.regular_params) << ", MACs " << grouped(r.regular_macs) << "\n";
    os << "DS reduction, network: params " << r.param_reduction.str() << " = " << fixed(r.param_reduction.value(), 3)
       << ", MACs " << r.mac_reduction.str() << " = " << fixed(r.mac_reduction.value(), 3) << "\n";
    os << "DS reduction, single 3x3x3 layer: " << r.layer_reduction.str() << " = "
       << fixed(r.layer_reduction.value(), 3) << "\n";
    return os.str();
}

nlohmann::json cost_report_json(const CostReport& r) {
    nlohmann::json layers = nlohmann::json::array();
    for (const auto& row : r.rows) {
        const LayerSpec& s = row.spec;
        layers.push_back({{"name", s.name},
                          {"kind", layer_kind_name(s.kind)},
                          {"k", s.k},
                          {"m", s.m},
                          {"n", s.n},
                          {"stride", s.stride},
                          {"dilation", s.dilation},
                          {"output", {s.out.h, s.out.w, s.out.d}},
                          {"macs", row.cost.macs},
                          {"params", row.cost.params},
                          {"rf", row.rf}});
    }
    auto rational = [](const Rational& q) {
        return nlohmann::json{{"num", q.num}, {"den", q.den}, {"value", q.value()}};
    };
    return {{"input", {r.input.h, r.input.w, r.input.d}},
            {"layers", layers},
            {"total_macs", r.total_macs},
            {"total_params", r.total_params},
            {"regular_macs", r.regular_macs},
            {"regular_params", r.regular_params},
            {"mac_reduction", rational(r.mac_reduction)},
            {"param_reduction", rational(r.param_reduction)},
            {"layer_reduction", rational(r.layer_reduction)}};
}

// ---------------------------------------------------------------------------
// Receptive field and gridding

int receptive_field(const std::vector<RfLayer>& layers) {
    int rf = 1;
    int jump = 1;
    for (const auto& l : layers) {
        rf += l.dilation * (l.k - 1) * jump;
        jump *= l.stride;
    }
    return rf;
}

int FootprintGrid::footprint_extent() const {
    int lo = extent;
    int hi = -1;
    for (int x = 0; x < extent; ++x) {
        for (int y = 0; y < extent; ++y) {
            for (int z = 0; z < extent; ++z) {
                if (at(x, y, z) == 0) continue;
                lo = std::min({lo, x, y, z});
                hi = std::max({hi, x, y, z});
            }
        }
    }
    return hi < lo ? 0 : hi - lo + 1;
}

bool FootprintGrid::has_holes() const {
    const int e = footprint_extent();
    const int lo = (extent - e) / 2;
    const int hi = lo + e - 1;
    for (int x = lo + 1; x < hi; ++x) {
        for (int y = lo + 1; y < hi; ++y) {
            for (int z = lo + 1; z < hi; ++z) {
                if (at(x, y, z) == 0) return true;
            }
        }
    }
    return false;
}

GriddingResult gridding_coverage(const std::vector<int>& dilations, int k) {
    if (k < 1 || k % 2 == 0) throw std::invalid_argument("gridding_coverage: k must be odd");
    int half = 0;
    for (int r : dilations) {
        if (r < 1) throw std::invalid_argument("gridding_coverage: dilation must be >= 1");
        half += r * (k - 1) / 2;
    }
    FootprintGrid g;
    g.extent = 2 * half + 1;
    const auto e = static_cast<std::size_t>(g.extent);
    std::vector<std::uint64_t> cur(e * e * e, 0);
    cur[(static_cast<std::size_t>(half) * e + half) * e + half] = 1;
    const int kh = k / 2;
    for (int r : dilations) {
        std::vector<std::uint64_t> next(cur.size(), 0);
        for (int x = 0; x < g.extent; ++x) {
            for (int y = 0; y < g.extent; ++y) {
                for (int z = 0; z < g.extent; ++z) {
                    const std::uint64_t c = cur[(static_cast<std::size_t>(x) * e + y) * e + z];
                    if (c == 0) continue;
                    for (int i = -kh; i <= kh; ++i) {
                        for (int j = -kh; j <= kh; ++j) {
                            for (int l = -kh; l <= kh; ++l) {
                                const int xx = x + i * r;
                                const int yy = y + j * r;
                                const int zz = z + l * r;
                                if (xx < 0 || yy < 0 || zz < 0 || xx >= g.extent || yy >= g.extent || zz >= g.extent) {
                                    continue;
                                }
                                next[(static_cast<std::size_t>(xx) * e + yy) * e + zz] += c;
                            }
                        }
                    }
                }
            }
        }
        cur = std::move(next);
    }
    g.counts = std::move(cur);
    GriddingResult out;
    out.holes = g.has_holes();
    out.grid = std::move(g);
    return out;
}

}  // namespace plsnet
