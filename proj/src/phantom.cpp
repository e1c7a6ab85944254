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

#include "plsnet/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <stdexcept>
#include <vector>

namespace plsnet {

void PhantomSpec::validate() const {
    auto fail = [](const std::string& m) { throw std::invalid_argument("phantom spec: " + m); };
    if (dims.h < 4 || dims.w < 4 || dims.d < 4) fail("dims must be >= 4 per axis");
    for (double s : spacing) {
        if (!(s > 0.0)) fail("spacing must be positive");
    }
    for (const auto* axes : {&right_axes, &left_axes}) {
        for (double a : *axes) {
            if (!(a > 0.0)) fail("lung semi-axes must be positive");
        }
    }
    for (const auto* p : {&right_oblique, &right_horizontal, &left_oblique}) {
        const double n = std::hypot(p->normal[0], p->normal[1], p->normal[2]);
        if (!(n > 0.0)) fail("plane normals must be non-zero");
    }
    if (!(noise_sigma >= 0.0)) fail("noise_sigma must be >= 0");
    if (!(fissure_gap >= 0.0 && fissure_gap <= 1.0)) fail("fissure_gap must be in [0, 1]");
    if (!(jitter >= 0.0 && jitter < 0.5)) fail("jitter must be in [0, 0.5)");
}

namespace {

nlohmann::json plane_json(const PhantomPlane& p) { return {{"normal", p.normal}, {"offset", p.offset}}; }

PhantomPlane plane_from(const nlohmann::json& j) {
    static const std::set<std::string> known{"normal", "offset"};
    for (const auto& [k, v] : j.items()) {
        if (!known.count(k)) throw std::invalid_argument("phantom spec: unknown plane key '" + k + "'");
    }
    PhantomPlane p;
    if (j.contains("normal")) j.at("normal").get_to(p.normal);
    if (j.contains("offset")) j.at("offset").get_to(p.offset);
    return p;
}

}  // namespace

void to_json(nlohmann::json& j, const PhantomSpec& s) {
    j = nlohmann::json{{"dims", {s.dims.h, s.dims.w, s.dims.d}},
                       {"spacing", s.spacing},
                       {"seed", s.seed},
                       {"right_center", s.right_center},
                       {"right_axes", s.right_axes},
                       {"left_center", s.left_center},
                       {"left_axes", s.left_axes},
                       {"right_oblique", plane_json(s.right_oblique)},
                       {"right_horizontal", plane_json(s.right_horizontal)},
                       {"left_oblique", plane_json(s.left_oblique)},
                       {"lobe_means", s.lobe_means},
                       {"background_mean", s.background_mean},
                       {"fissure_mean", s.fissure_mean},
                       {"noise_sigma", s.noise_sigma},
                       {"fissure_gap", s.fissure_gap},
                       {"jitter", s.jitter}};
}

void from_json(const nlohmann::json& j, PhantomSpec& s) {
    if (!j.is_object()) throw std::invalid_argument("phantom spec: expected a JSON object");
    static const std::set<std::string> known{
        "dims",          "spacing",          "seed",         "right_center",    "right_axes",   "left_center",
        "left_axes",     "right_oblique",    "right_horizontal", "left_oblique", "lobe_means",   "background_mean",
        "fissure_mean",  "noise_sigma",      "fissure_gap",  "jitter"};
    for (const auto& [k, v] : j.items()) {
        if (!known.count(k)) throw std::invalid_argument("phantom spec: unknown key '" + k + "'");
    }
    PhantomSpec out;
    if (j.contains("dims")) {
        const auto d = j.at("dims").get<std::array<int, 3>>();
        out.dims = {d[0], d[1], d[2]};
    }
    auto get = [&](const char* key, auto& field) {
        if (j.contains(key)) j.at(key).get_to(field);
    };
    get("spacing", out.spacing);
    get("seed", out.seed);
    get("right_center", out.right_center);
    get("right_axes", out.right_axes);
    get("left_center", out.left_center);
    get("left_axes", out.left_axes);
    if (j.contains("right_oblique")) out.right_oblique = plane_from(j.at("right_oblique"));
    if (j.contains("right_horizontal")) out.right_horizontal = plane_from(j.at("right_horizontal"));
    if (j.contains("left_oblique")) out.left_oblique = plane_from(j.at("left_oblique"));
    get("lobe_means", out.lobe_means);
    get("background_mean", out.background_mean);
    get("fissure_mean", out.fissure_mean);
    get("noise_sigma", out.noise_sigma);
    get("fissure_gap", out.fissure_gap);
    get("jitter", out.jitter);
    out.validate();
    s = out;
}

PhantomSpec load_phantom_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open phantom spec '" + path + "'");
    try {
        return nlohmann::json::parse(in).get<PhantomSpec>();
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument("phantom spec '" + path + "': " + e.what());
    }
}

namespace {

struct Lung {
    std::array<double, 3> center;
    std::array<double, 3> axes;
};

double side(const PhantomPlane& p, const std::array<double, 3>& u) {
    const double n = std::hypot(p.normal[0], p.normal[1], p.normal[2]);
    return (p.normal[0] * u[0] + p.normal[1] * u[1] + p.normal[2] * u[2]) / n - p.offset;
}

}  // namespace

Phantom generate_phantom(const PhantomSpec& spec_in) {
    spec_in.validate();
    PhantomSpec spec = spec_in;
    std::mt19937_64 rng(spec.seed);
    std::uniform_real_distribution<double> jit(-spec.jitter, spec.jitter);
    for (auto* v : {&spec.right_center, &spec.left_center}) {
        for (double& x : *v) x += 0.25 * jit(rng);
    }
    for (auto* v : {&spec.right_axes, &spec.left_axes}) {
        for (double& x : *v) x *= 1.0 + jit(rng);
    }
    for (auto* p : {&spec.right_oblique, &spec.right_horizontal, &spec.left_oblique}) p->offset += jit(rng);

    const Extents3 e = spec.dims;
    const std::array<int, 3> n{e.h, e.w, e.d};
    const std::array<Lung, 2> lungs{Lung{spec.right_center, spec.right_axes}, Lung{spec.left_center, spec.left_axes}};

    LabeledVolume labels(e, spec.spacing);
    std::vector<std::int8_t> lung_of(e.voxels(), -1);
    std::vector<double> depth(e.voxels(), 0.0);  // u_d, for ordering fissure gaps
    for (int h = 0; h < e.h; ++h) {
        for (int w = 0; w < e.w; ++w) {
            for (int d = 0; d < e.d; ++d) {
                const std::array<int, 3> p{h, w, d};
                for (int li = 0; li < 2; ++li) {
                    std::array<double, 3> u{};
                    double r2 = 0.0;
                    for (int a = 0; a < 3; ++a) {
                        u[a] = (p[a] + 0.5 - lungs[li].center[a] * n[a]) / (lungs[li].axes[a] * n[a]);
                        r2 += u[a] * u[a];
                    }
                    if (r2 > 1.0) continue;
                    std::uint16_t lobe = 0;
                    if (li == 0) {
                        if (side(spec.right_oblique, u) > 0.0) lobe = kRightLower;
                        else lobe = side(spec.right_horizontal, u) < 0.0 ? kRightUpper : kRightMiddle;
                    } else {
                        lobe = side(spec.left_oblique, u) > 0.0 ? kLeftLower : kLeftUpper;
                    }
                    const std::size_t i = labels.index(h, w, d);
                    labels.labels[i] = lobe;
                    lung_of[i] = static_cast<std::int8_t>(li);
                    depth[i] = u[2];
                    break;
                }
            }
        }
    }

    std::array<std::size_t, kLobeClasses> counts{};
    for (std::uint16_t l : labels.labels) ++counts[l];
    for (int l = 1; l <= kLobeCount; ++l) {
        if (counts[l] == 0) {
            throw std::invalid_argument("phantom spec: lobe " + std::string(lobe_name(l)) +
                                        " is empty; planes do not partition the lungs");
        }
    }

    // Fissure sheets: lung voxels with a 6-neighbour in the same lung but another lobe.
    std::vector<std::size_t> fissure;
    for (int h = 0; h < e.h; ++h) {
        for (int w = 0; w < e.w; ++w) {
            for (int d = 0; d < e.d; ++d) {
                const std::size_t i = labels.index(h, w, d);
                if (lung_of[i] < 0) continue;
                const std::array<std::array<int, 3>, 6> nb{{{h - 1, w, d}, {h + 1, w, d}, {h, w - 1, d},
                                                             {h, w + 1, d}, {h, w, d - 1}, {h, w, d + 1}}};
                for (const auto& q : nb) {
                    if (q[0] < 0 || q[1] < 0 || q[2] < 0 || q[0] >= e.h || q[1] >= e.w || q[2] >= e.d) continue;
                    const std::size_t j = labels.index(q[0], q[1], q[2]);
                    if (lung_of[j] == lung_of[i] && labels.labels[j] != labels.labels[i]) {
                        fissure.push_back(i);
                        break;
                    }
                }
            }
        }
    }
    std::stable_sort(fissure.begin(), fissure.end(),
                     [&](std::size_t a, std::size_t b) { return depth[a] < depth[b]; });
    const auto gaps = static_cast<std::size_t>(std::llround(spec.fissure_gap * static_cast<double>(fissure.size())));

    std::vector<double> mean(e.voxels());
    for (std::size_t i = 0; i < mean.size(); ++i) {
        const std::uint16_t l = labels.labels[i];
        mean[i] = l == 0 ? spec.background_mean : spec.lobe_means[l - 1];
    }
    for (std::size_t k = gaps; k < fissure.size(); ++k) mean[fissure[k]] = spec.fissure_mean;

    Phantom out{ImageVolume{Tensor4(Shape4{e.h, e.w, e.d, 1}), spec.spacing}, std::move(labels)};
    std::normal_distribution<double> noise(0.0, 1.0);
    auto& img = out.image.image.values();
    for (std::size_t i = 0; i < img.size(); ++i) {
        img[i] = static_cast<float>(mean[i] + spec.noise_sigma * noise(rng));
    }
    return out;
}

}  // namespace plsnet
