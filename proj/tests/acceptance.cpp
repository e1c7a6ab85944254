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


// Acceptance run: one PASS/FAIL line per criterion, tolerances fixed below.
// Exit status is nonzero when any criterion fails.

#include <chrono>
#include <cstdio>
#include <cstring>
#include <functional>
#include <string>

#include "plsnet/analysis.hpp"
#include "plsnet/kernels.hpp"
#include "plsnet/metrics.hpp"
#include "plsnet/network.hpp"
#include "plsnet/ops.hpp"
#include "plsnet/phantom.hpp"
#include "plsnet/preprocess.hpp"
#include "plsnet/training.hpp"
#include "support.hpp"

using namespace plsnet;
using plsnet::test::Gen;

namespace {

constexpr double kA4ParamsLo = 0.225e6;
constexpr double kA4ParamsHi = 0.275e6;
constexpr double kA4MacsAnchor = 103.69e9;
constexpr double kA4MacsFactor = 2.0;
constexpr double kA5Dsc = 0.90;
constexpr double kA5BudgetSeconds = 4 * 3600.0;
constexpr double kB1LayerTol = 1e-3;
constexpr double kB1NetworkTol = 1e-2;
constexpr double kB1Step = 1e-5;
constexpr double kB2Tol = 1e-5;
constexpr double kB3GradTol = 1e-6;
constexpr double kB5SoftmaxTol = 1e-6;

int failures = 0;

void report(const char* id, bool pass, const std::string& detail) {
    std::printf("%s %s  %s\n", id, pass ? "PASS" : "FAIL", detail.c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

template <typename A, typename B>
double max_abs(const A& a, const B& b) {
    double m = a.size() == b.size() ? 0.0 : 1e300;
    for (std::size_t i = 0; i < std::min(a.size(), b.size()); ++i)
        m = std::max(m, std::abs(double(a[i]) - double(b[i])));
    return m;
}

// ---------------------------------------------------------------------------

void a1() {
    const Rational r = ds_reduction_factor(3, 12);
    LayerSpec reg{"reg", LayerKind::kRegularConv, 3, 12, 12, 1, 1, {8, 8, 8}};
    LayerSpec ds = reg;
    ds.kind = LayerKind::kDsConv;
    const LayerCost cr = count_layer(reg), cd = count_layer(ds);
    // K^3 N / (K^3 + N) with K = 3, N = 12 is 324/39 = 108/13
    const bool ok = r == Rational::make(324, 39) && r.num == 108 && r.den == 13 &&
                    Rational::make(cr.params, cd.params) == r && Rational::make(cr.macs, cd.macs) == r;
    report("A1", ok, fmt("reduction %s = %.4f, layer params %llu/%llu", r.str().c_str(), r.value(),
                         (unsigned long long)cr.params, (unsigned long long)cd.params));
}

void a2() {
    const int dense = receptive_field({{3, 1, 1}, {3, 1, 2}, {3, 1, 3}, {3, 1, 4}});
    const int plain = receptive_field({{3, 1, 1}, {3, 1, 1}, {3, 1, 1}, {3, 1, 1}});
    const int fp_dense = gridding_coverage({1, 2, 3, 4}).grid.footprint_extent();
    const int fp_plain = gridding_coverage({1, 1, 1, 1}).grid.footprint_extent();
    report("A2", dense == 21 && plain == 9 && fp_dense == dense && fp_plain == plain,
           fmt("rf(1,2,3,4) = %d, rf(1,1,1,1) = %d, footprint extents %d, %d", dense, plain, fp_dense, fp_plain));
}

void a3() {
    const bool dense = gridding_coverage({1, 2, 3, 4}).holes;
    const bool flat = gridding_coverage({2, 2, 2}).holes;
    report("A3", !dense && flat, fmt("holes(1,2,3,4) = %s, holes(2,2,2) = %s", dense ? "true" : "false",
                                     flat ? "true" : "false"));
}

void a4() {
    const CostReport r = network_cost_report(NetworkConfig{}, {384, 384, 384});
    const double p = double(r.total_params), m = double(r.total_macs);
    const bool ok = p >= kA4ParamsLo && p <= kA4ParamsHi && m >= kA4MacsAnchor / kA4MacsFactor &&
                    m <= kA4MacsAnchor * kA4MacsFactor;
    report("A4", ok, fmt("params %.0f (%.4fM), MACs %.2fB (ratio to anchor %.3f)", p, p / 1e6, m / 1e9,
                         m / kA4MacsAnchor));
}

void a5() {
    PhantomSpec ps;
    ps.dims = {64, 64, 64};
    const Phantom ph = generate_phantom(ps);
    const Sample s{"phantom", preprocess(ph.image), resample_isotropic(ph.labels)};
    TrainConfig tc;  // lr 1e-3, betas 0.9/0.999, sigma 0.01, patience 20, 300 epochs
    const NetworkConfig nc;
    const auto t0 = std::chrono::steady_clock::now();
    const FitResult r = fit({s}, {s}, nc, tc);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    PlsNet<float> net(nc, r.params);
    const LabeledVolume pred = argmax_labels(net.forward(s.image.image, NormMode::kInfer), s.labels.spacing);
    double mean = 0.0;
    std::string lobes;
    for (int l = 1; l < nc.classes; ++l) {
        const double d = dsc(pred, s.labels, l);
        mean += d;
        lobes += fmt(" %s %.3f", std::string(lobe_name(l)).c_str(), d);
    }
    mean /= nc.classes - 1;
    const bool ok = mean > kA5Dsc && int(r.history.size()) <= tc.max_epochs && secs < kA5BudgetSeconds;
    report("A5", ok, fmt("mean foreground DSC %.4f after %zu epochs (%s, best epoch %d), %.0f s;%s", mean,
                         r.history.size(), stop_reason_name(r.reason).c_str(), r.best_epoch, secs, lobes.c_str()));
}

// ---------------------------------------------------------------------------

struct Worst {
    double value = 0.0;
    std::string where;
    void add(double e, const std::string& w) {
        if (e > value) {
            value = e;
            where = w;
        }
    }
};

using T4 = BasicTensor4<double>;

void check_all(Worst& worst, std::vector<double>& param, std::span<const double> analytic,
               const std::function<double()>& loss, const char* what) {
    if (param.size() != analytic.size()) {
        worst.add(1e300, std::string(what) + " size");
        return;
    }
    for (std::size_t i = 0; i < param.size(); ++i)
        worst.add(test::rel_error(analytic[i], test::central_difference(loss, param[i], kB1Step)), what);
}

void b1() {
    Gen g(9001);
    Worst w;
    auto shape = [&](int lo) { return Shape4{g.integer(lo, 5), g.integer(lo, 5), g.integer(lo, 5), g.integer(1, 4)}; };
    for (int trial = 0; trial < 4; ++trial) {
        const int r = g.integer(1, 2), s = g.integer(1, 2);
        const Shape4 xs{g.integer(3, 5), g.integer(3, 5), g.integer(3, 5), g.integer(1, 4)};
        const ConvGeometry geom = ConvGeometry::same(3, r, s);
        const int n = g.integer(1, 4);
        {
            T4 x = g.tensor<double>(xs);
            std::vector<double> k = g.values<double>(27 * std::size_t(xs.c) * n);
            const ConvKernel<double> ck{3, xs.c, n, k};
            const T4 c = g.tensor<double>(geom.output_shape(xs, 3, n));
            auto loss = [&] { return test::dot(c.values(), conv3d(x, ck, geom).values()); };
            const auto gr = conv3d_backward(x, ck, geom, c);
            check_all(w, x.values(), gr.input.values(), loss, "conv3d input");
            check_all(w, k, gr.weights, loss, "conv3d weights");
        }
        {
            T4 x = g.tensor<double>(xs);
            std::vector<double> k = g.values<double>(27 * std::size_t(xs.c));
            const DepthwiseKernel<double> dk{3, xs.c, k};
            const T4 c = g.tensor<double>(geom.output_shape(xs, 3, xs.c));
            auto loss = [&] { return test::dot(c.values(), depthwise_conv3d(x, dk, geom).values()); };
            const auto gr = depthwise_conv3d_backward(x, dk, geom, c);
            check_all(w, x.values(), gr.input.values(), loss, "depthwise input");
            check_all(w, k, gr.weights, loss, "depthwise weights");
        }
        {
            T4 x = g.tensor<double>(xs);
            std::vector<double> k = g.values<double>(std::size_t(xs.c) * n);
            const PointwiseKernel<double> pk{xs.c, n, k};
            const T4 c = g.tensor<double>(xs.with_channels(n));
            auto loss = [&] { return test::dot(c.values(), pointwise_conv3d(x, pk).values()); };
            const auto gr = pointwise_conv3d_backward(x, pk, c);
            check_all(w, x.values(), gr.input.values(), loss, "pointwise input");
            check_all(w, k, gr.weights, loss, "pointwise weights");
        }
        for (NormMode mode : {NormMode::kTrain, NormMode::kInfer}) {
            const Shape4 bs = shape(2);
            T4 x = g.tensor<double>(bs);
            BatchNormParams<double> bn(bs.c);
            bn.gamma = g.values<double>(bs.c, 0.5, 1.5);
            bn.beta = g.values<double>(bs.c);
            bn.running_mean = g.values<double>(bs.c);
            bn.running_var = g.values<double>(bs.c, 0.5, 2.0);
            const T4 c = g.tensor<double>(bs);
            auto loss = [&] {
                BatchNormParams<double> tmp = bn;
                return test::dot(c.values(), batch_norm(x, tmp.ref(), mode).values());
            };
            BatchNormParams<double> tmp = bn;
            BatchNormStats<double> st;
            (void)batch_norm(x, tmp.ref(), mode, &st);
            const auto gr = batch_norm_backward<double>(x, st, bn.gamma, c);
            check_all(w, x.values(), gr.input.values(), loss, "batch norm input");
            check_all(w, bn.gamma, gr.gamma, loss, "batch norm gamma");
            check_all(w, bn.beta, gr.beta, loss, "batch norm beta");
        }
        {
            const Shape4 rs = shape(1);
            T4 x = g.tensor<double>(rs);
            for (double& v : x.values())
                if (std::abs(v) < 0.05) v = 0.1;
            const T4 c = g.tensor<double>(rs);
            auto loss = [&] { return test::dot(c.values(), relu(x).values()); };
            check_all(w, x.values(), relu_backward(x, c).values(), loss, "relu");
        }
        {
            const Shape4 ss{g.integer(1, 5), g.integer(1, 5), g.integer(1, 5), g.integer(2, 4)};
            T4 z = g.tensor<double>(ss, -3, 3);
            const T4 c = g.tensor<double>(ss);
            auto loss = [&] { return test::dot(c.values(), softmax_channels(z).values()); };
            check_all(w, z.values(), softmax_backward(softmax_channels(z), c).values(), loss, "softmax");
            const LabeledVolume t = g.labels({ss.h, ss.w, ss.d}, ss.c);
            auto ce = [&] { return cross_entropy_loss(softmax_channels(z), t); };
            check_all(w, z.values(), softmax_cross_entropy_backward(softmax_channels(z), t).values(), ce,
                      "softmax cross entropy");
            T4 p = g.tensor<double>(ss, 0.05, 1.0);
            auto cep = [&] { return cross_entropy_loss(p, t); };
            check_all(w, p.values(), cross_entropy_backward(p, t).values(), cep, "cross entropy");
        }
        {
            const Shape4 ts = shape(1);
            const int h = g.integer(1, 8), wd = g.integer(1, 8), d = g.integer(1, 8);
            T4 x = g.tensor<double>(ts);
            const T4 c = g.tensor<double>({h, wd, d, ts.c});
            auto loss = [&] { return test::dot(c.values(), trilinear_resample(x, h, wd, d).values()); };
            check_all(w, x.values(), trilinear_resample_backward(c, ts).values(), loss, "trilinear");
        }
    }

    // full network, 20 random trainable parameters
    NetworkConfig cfg;
    cfg.classes = 3;
    cfg.growth_rate = 4;
    cfg.stem_channels = 4;
    cfg.level_channels = {6, 8, 8};
    cfg.blocks_per_level = {1, 1, 1};
    PlsNet<double> net(cfg);
    test::randomize(net.params(), g, 0.5);
    const T4 x = g.tensor<double>({16, 16, 16, 1});
    const LabeledVolume t = g.labels({16, 16, 16}, cfg.classes);
    const ParamStore<double> base = net.params();
    auto loss = [&] {
        PlsNet<double> probe(cfg, net.params());
        return cross_entropy_loss(probe.forward(x, NormMode::kTrain), t);
    };
    PlsNet<double> live(cfg, base);
    NetTrace<double> tr;
    const T4 p = live.forward(x, NormMode::kTrain, &tr);
    const auto grads = live.backward_logits(tr, softmax_cross_entropy_backward(p, t));
    std::vector<std::size_t> trainable;
    for (std::size_t i = 0; i < base.size(); ++i)
        if (base[i].trainable()) trainable.push_back(i);
    Worst nw;
    for (int probe = 0; probe < 20; ++probe) {
        const std::size_t pi = trainable[g.integer(0, int(trainable.size()) - 1)];
        const std::size_t k = g.integer(0, int(base[pi].value.size()) - 1);
        const double fd = test::central_difference(loss, net.params()[pi].value[k], kB1Step);
        nw.add(test::rel_error(grads[pi][k], fd, 1e-7), base[pi].name);
    }
    report("B1", w.value <= kB1LayerTol && nw.value <= kB1NetworkTol,
           fmt("layer worst %.2e (%s), network worst %.2e (%s)", w.value, w.where.c_str(), nw.value,
               nw.where.c_str()));
}

void b2() {
    Gen g(9002);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const int m = g.integer(1, 6), n = g.integer(1, 6), r = g.integer(1, 4);
        const Tensor4 x = g.tensor<float>({g.integer(4, 9), g.integer(4, 9), g.integer(4, 9), m});
        const auto dv = g.values<float>(27 * std::size_t(m));
        const auto pv = g.values<float>(std::size_t(m) * n);
        const DepthwiseKernel<float> d{3, m, dv};
        const PointwiseKernel<float> p{m, n, pv};
        const ConvGeometry geom = ConvGeometry::same(3, r);
        const auto composed = compose_factorised_kernel(d, p);
        worst = std::max(worst, max_abs(pointwise_conv3d(depthwise_conv3d(x, d, geom), p).values(),
                                        conv3d(x, composed.view(), geom).values()));
    }
    report("B2", worst <= kB2Tol, fmt("100 pairs, worst max-abs %.2e", worst));
}

void b3() {
    Gen g(9003);
    bool identical = true, fewer = true;
    double worst = 0.0;
    std::size_t nb = 0, cb = 0;
    for (int trial = 0; trial < 5; ++trial) {
        ParamStore<float> s;
        const DenseBlock b = DenseBlock::create(s, "b", DenseBlockConfig{g.integer(2, 25), g.integer(2, 12)});
        test::randomize(s, g);
        ParamStore<float> s2 = s;
        const Tensor4 x = g.tensor<float>({g.integer(4, 8), g.integer(4, 8), g.integer(4, 8), b.cfg.g0});
        BlockTrace<float> naive, ckpt;
        const Tensor4 y1 = drdb_forward(b, s, x, NormMode::kTrain, &naive);
        const Tensor4 y2 = drdb_forward_checkpointed(b, s2, x, NormMode::kTrain, &ckpt);
        identical = identical && y1 == y2;
        for (std::size_t i = 0; i < s.size(); ++i) identical = identical && s[i].value == s2[i].value;
        fewer = fewer && ckpt.retained_buffers() < naive.retained_buffers();
        nb = naive.retained_buffers();
        cb = ckpt.retained_buffers();
        const Tensor4 dy = g.tensor<float>(y1.shape());
        ParamGrads<float> g1(s), g2(s2);
        worst = std::max(worst, max_abs(drdb_backward(b, s, naive, dy, g1).values(),
                                        drdb_backward(b, s2, ckpt, dy, g2).values()));
        for (std::size_t i = 0; i < s.size(); ++i) worst = std::max(worst, max_abs(g1[i], g2[i]));
    }
    report("B3", identical && fewer && worst <= kB3GradTol,
           fmt("outputs %s, gradient max-abs %.2e, retained buffers %zu vs %zu", identical ? "bit-identical" : "DIFFER",
               worst, cb, nb));
}

void b4() {
    Gen g(9004);
    int mismatches = 0, compared = 0;
    bool self = true, doubling = true;
    for (int trial = 0; trial < 200; ++trial) {
        const Extents3 e{g.integer(1, 6), g.integer(1, 6), g.integer(1, 6)};
        const std::array<double, 3> sp{g.coin() ? 1.0 : 0.5, g.coin() ? 1.0 : 2.0, g.coin() ? 1.25 : 0.75};
        const LabeledVolume a = test::blobby(g, e, 4, sp), b = test::blobby(g, e, 4, sp);
        for (int l = 1; l < 4; ++l) {
            ++compared;
            mismatches += dsc(a, b, l) != test::oracle_dsc(a, b, l);
            self = self && dsc(a, a, l) == 1.0;
            if (extract_surface(a, l).empty() || extract_surface(b, l).empty()) continue;
            ++compared;
            mismatches += asd(a, b, l) != test::oracle_asd(a, b, l);
            self = self && asd(a, a, l) == 0.0;
        }
        LabeledVolume a1 = a, b1 = b, a2 = a, b2 = b;
        a1.spacing = b1.spacing = {1.0, 1.0, 1.0};
        a2.spacing = b2.spacing = {2.0, 2.0, 2.0};
        for (int l = 1; l < 4; ++l) {
            if (extract_surface(a, l).empty() || extract_surface(b, l).empty()) continue;
            doubling = doubling && asd(a2, b2, l) == 2.0 * asd(a1, b1, l);
        }
    }
    report("B4", mismatches == 0 && self && doubling,
           fmt("%d/%d metric values differ from the oracles; identity %s; spacing doubling %s", mismatches, compared,
               self ? "ok" : "BROKEN", doubling ? "ok" : "BROKEN"));
}

void b5() {
    Gen g(9005);
    NetworkConfig cfg;
    PlsNet<float> net(cfg);
    test::randomize(net.params(), g, 0.2);
    bool shapes = true;
    double worst = 0.0;
    for (int n : {64, 96}) {
        const Tensor4 x = g.tensor<float>({n, n, n, 1});
        const Tensor4 p = net.forward(x, NormMode::kInfer);
        shapes = shapes && p.shape() == Shape4{n, n, n, cfg.classes};
        const auto feats = net.encoder_forward(x, NormMode::kInfer);
        shapes = shapes && feats[3].shape().h == n / 8 && feats[3].shape().w == n / 8 && feats[3].shape().d == n / 8;
        for (std::size_t v = 0; v < p.shape().voxels(); ++v) {
            double s = 0.0;
            for (int k = 0; k < cfg.classes; ++k) s += p.values()[v * cfg.classes + k];
            worst = std::max(worst, std::abs(s - 1.0));
        }
    }
    test::zero_projections(net.params());
    double ident = 0.0;
    int blocks = 0;
    for (int level = 1; level <= 3; ++level) {
        for (const DenseBlock& b : net.blocks(level)) {
            const Tensor4 x = g.tensor<float>({6, 6, 6, b.cfg.g0});
            for (NormMode mode : {NormMode::kTrain, NormMode::kInfer}) {
                ParamStore<float> tmp = net.params();
                ident = std::max(ident, max_abs(drdb_forward(b, tmp, x, mode).values(), x.values()));
            }
            ++blocks;
        }
    }
    report("B5", shapes && worst <= kB5SoftmaxTol && ident == 0.0,
           fmt("shapes %s, softmax sum error %.2e, zeroed-projection blocks %d with max deviation %.1e",
               shapes ? "ok" : "WRONG", worst, blocks, ident));
}

void b6() {
    Gen g(9006);
    int agree = 0;
    for (int trial = 0; trial < 50; ++trial) {
        const int kind = trial % 3;
        const int k = kind == 2 ? 1 : 3;
        const int m = g.integer(1, 5), n = g.integer(1, 5), s = g.integer(1, 2), r = g.integer(1, 3);
        const ConvGeometry geom = kind == 2 ? ConvGeometry{} : ConvGeometry::same(k, r, s);
        const Tensor4 x = g.tensor<float>({g.integer(1, 7), g.integer(1, 7), g.integer(1, 7), m});
        const Shape4 ys = geom.output_shape(x.shape(), k, n);
        LayerSpec spec{"x", LayerKind::kRegularConv, k, m, n, geom.stride, geom.dilation, {ys.h, ys.w, ys.d}};
        const auto w = g.values<float>(std::size_t(k) * k * k * m * n);
        const auto d = g.values<float>(std::size_t(k) * k * k * m);
        const auto p = g.values<float>(std::size_t(m) * n);
        std::uint64_t macs = 0;
        if (kind == 0) {
            (void)kernels::reference::conv3d(x, ConvKernel<float>{k, m, n, w}, geom, &macs);
        } else if (kind == 1) {
            spec.kind = LayerKind::kDsConv;
            const Tensor4 z = kernels::reference::depthwise3d(x, DepthwiseKernel<float>{k, m, d}, geom, &macs);
            (void)kernels::reference::pointwise3d(z, PointwiseKernel<float>{m, n, p}, &macs);
        } else {
            spec.kind = LayerKind::kPointwise;
            (void)kernels::reference::pointwise3d(x, PointwiseKernel<float>{m, n, p}, &macs);
        }
        agree += count_layer(spec).macs == macs;
    }
    report("B6", agree == 50, fmt("%d/50 layer specs agree with the instrumented counter", agree));
}

}  // namespace

int main(int argc, char** argv) {
    bool fast = true, training = true;
    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--skip-training") == 0) {
            training = false;
        } else if (std::strcmp(argv[i], "--training-only") == 0) {
            fast = false;
        } else {
            std::fprintf(stderr, "usage: %s [--skip-training | --training-only]\n", argv[0]);
            return 2;
        }
    }
    if (fast) {
        a1();
        a2();
        a3();
        a4();
        b1();
        b2();
        b3();
        b4();
        b5();
        b6();
    }
    if (training) a5();
    std::printf("%d criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
