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


#include <map>

#include "doctest.h"
#include "plsnet/analysis.hpp"
#include "plsnet/kernels.hpp"
#include "support.hpp"

using namespace plsnet;
using plsnet::test::Gen;

namespace {

// Dependency tracing along one axis: the input positions a single output
// position reads through the stack, with each layer's "same" padding.
int traced_extent(const std::vector<RfLayer>& layers) {
    std::set<long> pos{0};
    for (auto it = layers.rbegin(); it != layers.rend(); ++it) {
        std::set<long> prev;
        const int pad = it->dilation * (it->k - 1) / 2;
        for (long p : pos)
            for (int i = 0; i < it->k; ++i) prev.insert(p * it->stride - pad + i * it->dilation);
        pos = std::move(prev);
    }
    return static_cast<int>(*pos.rbegin() - *pos.begin() + 1);
}

// Path counts by explicit enumeration of every tap combination.
std::map<std::tuple<int, int, int>, std::uint64_t> enumerate_paths(const std::vector<int>& dil, int k) {
    std::map<std::tuple<int, int, int>, std::uint64_t> out{{{0, 0, 0}, 1}};
    for (int r : dil) {
        std::map<std::tuple<int, int, int>, std::uint64_t> next;
        for (const auto& [p, c] : out)
            for (int i = 0; i < k; ++i)
                for (int j = 0; j < k; ++j)
                    for (int l = 0; l < k; ++l) {
                        const int h = (k - 1) / 2;
                        next[{std::get<0>(p) + (i - h) * r, std::get<1>(p) + (j - h) * r,
                              std::get<2>(p) + (l - h) * r}] += c;
                    }
        out = std::move(next);
    }
    return out;
}

}  // namespace

TEST_CASE("count_layer examples") {
    LayerSpec reg{"a", LayerKind::kRegularConv, 3, 1, 12, 1, 1, {4, 4, 4}};
    CHECK(count_layer(reg).macs == 20736);
    CHECK(count_layer(reg).params == 324);
    LayerSpec ds = reg;
    ds.kind = LayerKind::kDsConv;
    CHECK(count_layer(ds).macs == 2496);
    CHECK(count_layer(ds).params == 39);
    CHECK(ds_reduction_factor(3, 12) == Rational{108, 13});
    CHECK(Rational::make(20736, 2496) == ds_reduction_factor(3, 12));
    LayerSpec k1{"b", LayerKind::kRegularConv, 1, 5, 5, 1, 1, {2, 2, 2}};
    CHECK(count_layer(k1).macs == 200);
    CHECK(count_layer(k1).params == 25);
    LayerSpec bn{"c", LayerKind::kBatchNorm, 1, 7, 7, 1, 1, {3, 3, 3}};
    CHECK(count_layer(bn).macs == 0);
    CHECK(count_layer(bn).params == 14);
    for (LayerKind k : {LayerKind::kRelu, LayerKind::kConcat, LayerKind::kAdd, LayerKind::kUpsample,
                        LayerKind::kSoftmax}) {
        LayerSpec s{"z", k, 1, 4, 4, 1, 1, {2, 2, 2}};
        CHECK(count_layer(s).macs == 0);
        CHECK(count_layer(s).params == 0);
    }
    LayerSpec neg = reg;
    neg.m = 0;
    CHECK_THROWS_AS(count_layer(neg), std::invalid_argument);
}

TEST_CASE("layer kind names round trip") {
    for (LayerKind k : {LayerKind::kRegularConv, LayerKind::kDsConv, LayerKind::kPointwise, LayerKind::kUpsample,
                        LayerKind::kConcat, LayerKind::kAdd, LayerKind::kBatchNorm, LayerKind::kRelu,
                        LayerKind::kSoftmax}) {
        CHECK(parse_layer_kind(layer_kind_name(k)) == k);
    }
    CHECK_THROWS_AS(parse_layer_kind("deconv"), std::invalid_argument);
}

TEST_CASE("property: reduction factor is K^3 N / (K^3 + N) in lowest terms") {
    for (int k : {1, 3, 5})
        for (int n = 1; n <= 64; ++n) {
            const Rational r = ds_reduction_factor(k, n);
            const std::uint64_t k3 = std::uint64_t(k) * k * k;
            CHECK(r.num * (k3 + n) == r.den * k3 * n);
            CHECK(std::gcd(r.num, r.den) == 1);
            LayerSpec reg{"a", LayerKind::kRegularConv, k, 3, n, 1, 1, {3, 2, 5}};
            LayerSpec ds = reg;
            ds.kind = LayerKind::kDsConv;
            CHECK(Rational::make(count_layer(reg).macs, count_layer(ds).macs) == r);
            CHECK(Rational::make(count_layer(reg).params, count_layer(ds).params) == r);
        }
}

TEST_CASE("property: count_layer matches the instrumented reference kernels") {
    Gen g(300);
    for (int trial = 0; trial < 40; ++trial) {
        const int kind = g.integer(0, 2);
        const int k = kind == 2 ? 1 : (g.coin() ? 3 : 1);
        const int m = g.integer(1, 4), n = g.integer(1, 4), s = g.integer(1, 2), r = g.integer(1, 2);
        const ConvGeometry geom = ConvGeometry::same(k, r, s);
        const Tensor4 x = g.tensor<float>({g.integer(1, 6), g.integer(1, 6), g.integer(1, 6), m});
        const Shape4 ys = geom.output_shape(x.shape(), k, n);
        LayerSpec spec{"x", LayerKind::kRegularConv, k, m, n, s, r, {ys.h, ys.w, ys.d}};
        std::uint64_t macs = 0;
        if (kind == 0) {
            const auto w = g.values<float>(std::size_t(k) * k * k * m * n);
            (void)kernels::reference::conv3d(x, ConvKernel<float>{k, m, n, w}, geom, &macs);
        } else if (kind == 1) {
            spec.kind = LayerKind::kDsConv;
            const auto d = g.values<float>(std::size_t(k) * k * k * m);
            const auto p = g.values<float>(std::size_t(m) * n);
            const Tensor4 z = kernels::reference::depthwise3d(x, DepthwiseKernel<float>{k, m, d}, geom, &macs);
            (void)kernels::reference::pointwise3d(z, PointwiseKernel<float>{m, n, p}, &macs);
        } else {
            spec.kind = LayerKind::kPointwise;
            spec.stride = spec.dilation = 1;
            spec.out = {x.shape().h, x.shape().w, x.shape().d};
            const auto p = g.values<float>(std::size_t(m) * n);
            (void)kernels::reference::pointwise3d(x, PointwiseKernel<float>{m, n, p}, &macs);
        }
        CHECK(count_layer(spec).macs == macs);
    }
}

TEST_CASE("receptive field") {
    const std::vector<RfLayer> dense{{3, 1, 1}, {3, 1, 2}, {3, 1, 3}, {3, 1, 4}};
    CHECK(receptive_field(dense) == 21);
    CHECK(receptive_field({{3, 1, 1}, {3, 1, 1}, {3, 1, 1}, {3, 1, 1}}) == 9);
    CHECK(receptive_field({{3, 2, 1}, {3, 2, 1}}) == 7);
    CHECK(traced_extent({{3, 2, 1}, {3, 2, 1}}) == 7);
    CHECK(receptive_field({}) == 1);
    Gen g(301);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<RfLayer> layers(g.integer(1, 5));
        for (auto& l : layers) l = {2 * g.integer(0, 2) + 1, g.integer(1, 2), g.integer(1, 4)};
        CHECK(receptive_field(layers) == traced_extent(layers));
    }
}

TEST_CASE("gridding coverage") {
    const auto single = gridding_coverage({1});
    CHECK(single.grid.extent == 3);
    CHECK(single.grid.counts == std::vector<std::uint64_t>(27, 1));
    CHECK_FALSE(single.holes);

    const auto good = gridding_coverage({1, 2, 3, 4});
    CHECK_FALSE(good.holes);
    CHECK(good.grid.footprint_extent() == 21);
    const auto bad = gridding_coverage({2, 2, 2});
    CHECK(bad.holes);
    CHECK(bad.grid.at(bad.grid.extent / 2 + 1, bad.grid.extent / 2, bad.grid.extent / 2) == 0);
    CHECK_FALSE(gridding_coverage({1, 2, 3}).holes);
}

TEST_CASE("property: gridding grid equals path enumeration and matches the receptive field") {
    Gen g(302);
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<int> dil(g.integer(1, 3));
        for (int& r : dil) r = g.integer(1, 4);
        const auto res = gridding_coverage(dil);
        const auto paths = enumerate_paths(dil, 3);
        const int c = res.grid.extent / 2;
        std::uint64_t total = 0;
        for (int x = 0; x < res.grid.extent; ++x)
            for (int y = 0; y < res.grid.extent; ++y)
                for (int z = 0; z < res.grid.extent; ++z) {
                    const auto it = paths.find({x - c, y - c, z - c});
                    CHECK(res.grid.at(x, y, z) == (it == paths.end() ? 0 : it->second));
                    CHECK(res.grid.at(x, y, z) == res.grid.at(res.grid.extent - 1 - x, y, z));
                    total += res.grid.at(x, y, z);
                }
        std::uint64_t want = 0;
        for (const auto& [p, n] : paths) want += n;
        CHECK(total == want);
        CHECK(res.grid.at(c, c, c) >= 1);
        std::vector<RfLayer> layers;
        for (int r : dil) layers.push_back({3, 1, r});
        CHECK(res.grid.footprint_extent() == receptive_field(layers));
        // holes: a zero strictly inside the bounding cube
        const int half = receptive_field(layers) / 2;
        bool hole = false;
        for (int x = -half + 1; x < half; ++x)
            for (int y = -half + 1; y < half; ++y)
                for (int z = -half + 1; z < half; ++z) hole |= !paths.count({x, y, z});
        CHECK(res.holes == hole);
    }
}

TEST_CASE("network cost report") {
    const NetworkConfig cfg;
    const CostReport r = network_cost_report(cfg, {384, 384, 384});
    std::uint64_t macs = 0, params = 0;
    for (const auto& row : r.rows) {
        macs += row.cost.macs;
        params += row.cost.params;
        CHECK(row.cost.macs == count_layer(row.spec).macs);
    }
    CHECK(macs == r.total_macs);
    CHECK(params == r.total_params);
    CHECK(r.total_params == 249543);
    CHECK(r.layer_reduction == Rational{108, 13});
    CHECK(r.regular_macs > r.total_macs);
    CHECK(r.regular_params > r.total_params);
    CHECK(r.mac_reduction == Rational::make(r.regular_macs, r.total_macs));

    // padding to a multiple of 8 happens before counting
    CHECK(network_cost_report(cfg, {61, 64, 57}).total_macs == network_cost_report(cfg, {64, 64, 64}).total_macs);

    const auto j = cost_report_json(r);
    CHECK(j.at("total_params").get<std::uint64_t>() == r.total_params);
    CHECK(j.at("layers").size() == r.rows.size());
    const std::string text = format_cost_report(r);
    CHECK(text.find("249,543") != std::string::npos);
    CHECK(text.find("108/13") != std::string::npos);

    Gen g(303);
    for (int trial = 0; trial < 20; ++trial) {
        NetworkConfig c;
        c.classes = g.integer(2, 8);
        c.growth_rate = g.integer(2, 16);
        c.stem_channels = g.integer(1, 16);
        for (int& v : c.level_channels) v = g.integer(1, 64);
        for (int& v : c.blocks_per_level) v = g.integer(0, 3);
        c.input_reinforcement = g.coin();
        c.dense_blocks = g.coin();
        const CostReport cr = network_cost_report(c, {32, 32, 32});
        CHECK(cr.regular_macs > cr.total_macs);
        CHECK(cr.regular_params > cr.total_params);
    }
}

TEST_CASE("receptive field column of the cost report") {
    const auto rows = network_layers(NetworkConfig{}, {64, 64, 64});
    REQUIRE(!rows.empty());
    CHECK(rows.front().rf == 3);  // the stem
    int prev = 0;
    for (const auto& row : rows) {
        if (row.spec.name.rfind("enc.", 0) == 0) {
            CHECK(row.rf >= prev);
            prev = row.rf;
        }
    }
}
