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


#include "doctest.h"
#include "plsnet/metrics.hpp"
#include "support.hpp"

using namespace plsnet;
using plsnet::test::Gen;
using plsnet::test::blobby;


TEST_CASE("dsc examples") {
    LabeledVolume a({2, 2, 2}, {1, 1, 1}), b({2, 2, 2}, {1, 1, 1});
    CHECK(dsc(a, b, 1) == 1.0);  // both empty
    a.at(0, 0, 0) = a.at(0, 0, 1) = 1;
    b.at(0, 0, 0) = b.at(1, 1, 1) = 1;
    CHECK(dsc(a, b, 1) == 0.5);
    CHECK(dsc(a, a, 1) == 1.0);
    LabeledVolume c({2, 2, 2}, {1, 1, 1});
    c.at(1, 0, 0) = c.at(1, 0, 1) = 1;
    CHECK(dsc(a, c, 1) == 0.0);
    CHECK_THROWS_AS(dsc(a, LabeledVolume({2, 2, 3}, {1, 1, 1}), 1), std::invalid_argument);
    try {
        dsc(a, LabeledVolume({2, 2, 2}, {1, 1, 2}), 1);
        FAIL("expected a grid mismatch");
    } catch (const std::invalid_argument& e) {
        CHECK(std::string(e.what()).find("2x2x2") != std::string::npos);
    }
}

TEST_CASE("surface extraction") {
    LabeledVolume v({5, 5, 5}, {1, 1, 1});
    for (int h = 1; h < 4; ++h)
        for (int w = 1; w < 4; ++w)
            for (int d = 1; d < 4; ++d) v.at(h, w, d) = 2;
    const auto s = extract_surface(v, 2);
    CHECK(s.size() == 26);
    CHECK(std::find(s.begin(), s.end(), Voxel3{2, 2, 2}) == s.end());

    LabeledVolume one({3, 3, 3}, {1, 1, 1});
    one.at(1, 2, 0) = 4;
    CHECK(extract_surface(one, 4) == std::vector<Voxel3>{{1, 2, 0}});
    CHECK(extract_surface(one, 3).empty());

    LabeledVolume full({3, 3, 3}, {1, 1, 1}, 1);  // boundary voxels count
    CHECK(extract_surface(full, 1).size() == 26);
}

TEST_CASE("asd examples") {
    LabeledVolume a({1, 1, 8}, {1, 1, 1}), b({1, 1, 8}, {1, 1, 1});
    a.at(0, 0, 1) = 1;
    b.at(0, 0, 4) = 1;
    CHECK(asd(a, b, 1) == 3.0);
    CHECK(asd(a, a, 1) == 0.0);

    LabeledVolume c({2, 2, 2}, {1, 1, 2}), d({2, 2, 2}, {1, 1, 2});
    c.at(0, 0, 0) = 1;
    d.at(0, 0, 1) = 1;
    CHECK(asd(c, d, 1) == 2.0);

    CHECK_THROWS_AS(asd(a, LabeledVolume({1, 1, 8}, {1, 1, 1}), 1), UndefinedMetricError);
    CHECK_THROWS_AS(asd(LabeledVolume({1, 1, 8}, {1, 1, 1}), a, 1), UndefinedMetricError);
}

TEST_CASE("property: metrics match brute-force oracles on random grids") {
    Gen g(400);
    for (int trial = 0; trial < 200; ++trial) {
        const Extents3 e{g.integer(1, 6), g.integer(1, 6), g.integer(1, 6)};
        const std::array<double, 3> sp{g.coin() ? 1.0 : 0.5, g.coin() ? 1.0 : 2.0, g.coin() ? 1.25 : 0.75};
        const LabeledVolume a = blobby(g, e, 4, sp), b = blobby(g, e, 4, sp);
        for (int l = 1; l < 4; ++l) {
            CHECK(dsc(a, b, l) == test::oracle_dsc(a, b, l));
            CHECK(dsc(a, b, l) == dsc(b, a, l));
            const auto sa = extract_surface(a, l);
            const auto oa = test::oracle_surface(a, l);
            REQUIRE(sa.size() == oa.size());
            for (std::size_t i = 0; i < sa.size(); ++i)
                CHECK(Voxel3{std::get<0>(oa[i]), std::get<1>(oa[i]), std::get<2>(oa[i])} == sa[i]);
            if (sa.empty() || extract_surface(b, l).empty()) {
                CHECK_THROWS_AS(asd(a, b, l), UndefinedMetricError);
                continue;
            }
            CHECK(asd(a, b, l) == test::oracle_asd(a, b, l));
            CHECK(asd(a, b, l) == asd(b, a, l));
            CHECK(asd(a, a, l) == 0.0);
            CHECK(dsc(a, a, l) == 1.0);
        }
    }
}

TEST_CASE("property: distance map equals the all-pairs minimum") {
    Gen g(401);
    for (int trial = 0; trial < 40; ++trial) {
        const Extents3 e{g.integer(1, 7), g.integer(1, 7), g.integer(1, 7)};
        const std::array<double, 3> sp{g.real(0.3, 2.0), g.real(0.3, 2.0), g.real(0.3, 2.0)};
        std::vector<Voxel3> sites;
        const int n = g.integer(1, 6);
        for (int i = 0; i < n; ++i) sites.push_back({g.integer(0, e.h - 1), g.integer(0, e.w - 1), g.integer(0, e.d - 1)});
        const auto dm = squared_distance_map(e, sp, sites);
        for (int h = 0; h < e.h; ++h)
            for (int w = 0; w < e.w; ++w)
                for (int d = 0; d < e.d; ++d) {
                    double best = 1e300;
                    for (const auto& s : sites) {
                        const double x = (h - s.h) * sp[0], y = (w - s.w) * sp[1], z = (d - s.d) * sp[2];
                        best = std::min(best, x * x + y * y + z * z);
                    }
                    CHECK(dm[(std::size_t(h) * e.w + w) * e.d + d] == doctest::Approx(best).epsilon(1e-12));
                }
    }
}

TEST_CASE("property: asd doubles when isotropic spacing doubles") {
    Gen g(402);
    for (int trial = 0; trial < 50; ++trial) {
        const Extents3 e{g.integer(2, 6), g.integer(2, 6), g.integer(2, 6)};
        const double s = g.coin() ? 1.0 : 0.75;
        LabeledVolume a = blobby(g, e, 3, {s, s, s}), b = blobby(g, e, 3, {s, s, s});
        if (extract_surface(a, 1).empty() || extract_surface(b, 1).empty()) continue;
        const double base = asd(a, b, 1);
        a.spacing = b.spacing = {2 * s, 2 * s, 2 * s};
        CHECK(asd(a, b, 1) == 2.0 * base);
    }
}

TEST_CASE("per-lobe report") {
    Gen g(403);
    LabeledVolume ref({6, 6, 6}, {1, 1, 1});
    for (auto& l : ref.labels) l = static_cast<std::uint16_t>(g.integer(0, 5));
    const LobeReport same = per_lobe_report(ref, ref);
    REQUIRE(same.rows.size() == 5);
    const char* names[] = {"RUL", "RML", "RLL", "LUL", "LLL"};
    for (int i = 0; i < 5; ++i) {
        CHECK(same.rows[i].label == i + 1);
        CHECK(same.rows[i].name == names[i]);
        CHECK(same.rows[i].dsc == 1.0);
        CHECK(same.rows[i].asd == 0.0);
    }
    LabeledVolume pred = ref;
    for (int i = 0; i < 40; ++i) pred.labels[g.integer(0, 215)] = static_cast<std::uint16_t>(g.integer(1, 5));
    const LobeReport r = per_lobe_report(pred, ref);
    double m = 0.0, ma = 0.0;
    for (const auto& row : r.rows) {
        m += row.dsc;
        ma += row.asd;
        CHECK(row.dsc == dsc(pred, ref, row.label));
    }
    CHECK(std::abs(r.mean_dsc - m / 5) <= 1e-12);
    CHECK(std::abs(r.mean_asd - ma / 5) <= 1e-12);

    const std::string csv = lobe_report_csv(r);
    CHECK(csv.rfind("lobe,dsc,asd_mm\n", 0) == 0);
    CHECK(csv.find("\nOverall,") != std::string::npos);
    const std::string text = format_lobe_report(r);
    CHECK(text.find("RML") != std::string::npos);
    CHECK(text.find("Overall") != std::string::npos);
}
