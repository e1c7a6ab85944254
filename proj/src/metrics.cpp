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

#include "plsnet/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace plsnet {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string grid_str(const LabeledVolume& v) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "%s @ (%g, %g, %g) mm", v.dims.str().c_str(), v.spacing[0], v.spacing[1],
                  v.spacing[2]);
    return buf;
}

// 1D lower envelope of parabolas f(v) + ((q - v) * s)^2 over finite f.
void distance_1d(const std::vector<double>& f, double s, std::vector<double>& out, std::vector<int>& v,
                 std::vector<double>& z) {
    const int n = static_cast<int>(f.size());
    const double inv_s2 = 1.0 / (s * s);
    auto key = [&](int q) { return f[q] * inv_s2 + static_cast<double>(q) * q; };
    auto eval = [&](int site, int q) {
        const double x = static_cast<double>(q - site) * s;
        return f[site] + x * x;
    };
    int k = -1;
    for (int q = 0; q < n; ++q) {
        if (!std::isfinite(f[q])) continue;
        if (k < 0) {
            k = 0;
            v[0] = q;
            z[0] = -kInf;
            z[1] = kInf;
            continue;
        }
        double sx = 0.0;
        while (true) {
            sx = (key(q) - key(v[k])) / (2.0 * (q - v[k]));
            if (sx <= z[k] && k > 0) {
                --k;
            } else {
                break;
            }
        }
        if (sx <= z[k]) {
            // k == 0 and the new parabola dominates everywhere.
            v[0] = q;
            z[1] = kInf;
            continue;
        }
        ++k;
        v[k] = q;
        z[k] = sx;
        z[k + 1] = kInf;
    }
    if (k < 0) {
        std::fill(out.begin(), out.end(), kInf);
        return;
    }
    int j = 0;
    for (int q = 0; q < n; ++q) {
        while (z[j + 1] < q) ++j;
        // Neighbouring envelope pieces guard against rounding at breakpoints.
        double best = eval(v[j], q);
        if (j > 0) best = std::min(best, eval(v[j - 1], q));
        if (j < k) best = std::min(best, eval(v[j + 1], q));
        out[q] = best;
    }
}

}  // namespace

void require_same_grid(const LabeledVolume& a, const LabeledVolume& b) {
    if (a.dims != b.dims || a.spacing != b.spacing) {
        throw std::invalid_argument("grid mismatch: " + grid_str(a) + " vs " + grid_str(b));
    }
    if (a.labels.size() != a.dims.voxels() || b.labels.size() != b.dims.voxels()) {
        throw std::invalid_argument("label volume size does not match its extents");
    }
}

double dsc(const LabeledVolume& a, const LabeledVolume& b, int label) {
    require_same_grid(a, b);
    std::size_t na = 0;
    std::size_t nb = 0;
    std::size_t both = 0;
    for (std::size_t i = 0; i < a.labels.size(); ++i) {
        const bool ia = a.labels[i] == label;
        const bool ib = b.labels[i] == label;
        na += ia;
        nb += ib;
        both += ia && ib;
    }
    if (na + nb == 0) return 1.0;
    return 2.0 * static_cast<double>(both) / static_cast<double>(na + nb);
}

std::vector<Voxel3> extract_surface(const LabeledVolume& v, int label) {
    const Extents3& e = v.dims;
    std::vector<Voxel3> out;
    for (int h = 0; h < e.h; ++h) {
        for (int w = 0; w < e.w; ++w) {
            for (int d = 0; d < e.d; ++d) {
                if (v.at(h, w, d) != label) continue;
                const bool boundary = h == 0 || w == 0 || d == 0 || h == e.h - 1 || w == e.w - 1 || d == e.d - 1;
                if (boundary || v.at(h - 1, w, d) != label || v.at(h + 1, w, d) != label ||
                    v.at(h, w - 1, d) != label || v.at(h, w + 1, d) != label || v.at(h, w, d - 1) != label ||
                    v.at(h, w, d + 1) != label) {
                    out.push_back({h, w, d});
                }
            }
        }
    }
    return out;
}

std::vector<double> squared_distance_map(const Extents3& dims, const std::array<double, 3>& spacing,
                                         const std::vector<Voxel3>& sites) {
    const std::array<int, 3> n{dims.h, dims.w, dims.d};
    const std::array<std::size_t, 3> stride{static_cast<std::size_t>(dims.w) * dims.d,
                                            static_cast<std::size_t>(dims.d), 1};
    std::vector<double> dist(dims.voxels(), kInf);
    for (const auto& s : sites) dist[s.h * stride[0] + s.w * stride[1] + s.d * stride[2]] = 0.0;

    for (int axis = 0; axis < 3; ++axis) {
        const int len = n[axis];
        const int a1 = axis == 0 ? 1 : 0;
        const int a2 = axis == 2 ? 1 : 2;
        const long lines = static_cast<long>(n[a1]) * n[a2];
#pragma omp parallel
        {
            std::vector<double> f(len), out(len), z(len + 1);
            std::vector<int> v(len);
#pragma omp for schedule(static)
            for (long line = 0; line < lines; ++line) {
                const std::size_t base = static_cast<std::size_t>(line / n[a2]) * stride[a1] +
                                         static_cast<std::size_t>(line % n[a2]) * stride[a2];
                for (int q = 0; q < len; ++q) f[q] = dist[base + q * stride[axis]];
                distance_1d(f, spacing[axis], out, v, z);
                for (int q = 0; q < len; ++q) dist[base + q * stride[axis]] = out[q];
            }
        }
    }
    return dist;
}

double asd(const LabeledVolume& a, const LabeledVolume& b, int label) {
    require_same_grid(a, b);
    const std::vector<Voxel3> sa = extract_surface(a, label);
    const std::vector<Voxel3> sb = extract_surface(b, label);
    if (sa.empty() || sb.empty()) {
        throw UndefinedMetricError("ASD undefined for label " + std::to_string(label) + ": " +
                                   (sa.empty() ? "first" : "second") + " segmentation has no surface voxels");
    }
    const std::vector<double> to_b = squared_distance_map(b.dims, b.spacing, sb);
    const std::vector<double> to_a = squared_distance_map(a.dims, a.spacing, sa);
    double sum_a = 0.0;
    for (const auto& p : sa) sum_a += std::sqrt(to_b[a.index(p.h, p.w, p.d)]);
    double sum_b = 0.0;
    for (const auto& p : sb) sum_b += std::sqrt(to_a[b.index(p.h, p.w, p.d)]);
    return (sum_a + sum_b) / static_cast<double>(sa.size() + sb.size());
}

LobeReport per_lobe_report(const LabeledVolume& pred, const LabeledVolume& ref) {
    require_same_grid(pred, ref);
    LobeReport r;
    for (int label = 1; label <= kLobeCount; ++label) {
        LobeRow row;
        row.label = label;
        row.name = std::string(lobe_name(label));
        row.dsc = dsc(pred, ref, label);
        row.asd = asd(pred, ref, label);
        r.mean_dsc += row.dsc;
        r.mean_asd += row.asd;
        r.rows.push_back(std::move(row));
    }
    r.mean_dsc /= kLobeCount;
    r.mean_asd /= kLobeCount;
    return r;
}

std::string format_lobe_report(const LobeReport& r) {
    std::ostringstream os;
    char line[128];
    std::snprintf(line, sizeof line, "%-8s %8s %10s\n", "lobe", "DSC", "ASD(mm)");
    os << line;
    for (const auto& row : r.rows) {
        std::snprintf(line, sizeof line, "%-8s %8.4f %10.4f\n", row.name.c_str(), row.dsc, row.asd);
        os << line;
    }
    std::snprintf(line, sizeof line, "%-8s %8.4f %10.4f\n", "Overall", r.mean_dsc, r.mean_asd);
    os << line;
    return os.str();
}

std::string lobe_report_csv(const LobeReport& r) {
    std::ostringstream os;
    char line[128];
    os << "lobe,dsc,asd_mm\n";
    for (const auto& row : r.rows) {
        std::snprintf(line, sizeof line, "%s,%.6f,%.6f\n", row.name.c_str(), row.dsc, row.asd);
        os << line;
    }
    std::snprintf(line, sizeof line, "Overall,%.6f,%.6f\n", r.mean_dsc, r.mean_asd);
    os << line;
    return os.str();
}

}  // namespace plsnet
