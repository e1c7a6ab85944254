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

#include <stdexcept>
#include <string>
#include <vector>

#include "plsnet/labels.hpp"

namespace plsnet {

/// ASD with an empty surface on either side.
class UndefinedMetricError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Throws std::invalid_argument naming both grids when extents or spacing differ.
void require_same_grid(const LabeledVolume& a, const LabeledVolume& b);

/// 2|A n B| / (|A| + |B|) over voxels carrying `label`; 1 when both are empty.
double dsc(const LabeledVolume& a, const LabeledVolume& b, int label);

struct Voxel3 {
    int h = 0;
    int w = 0;
    int d = 0;
    friend bool operator==(const Voxel3&, const Voxel3&) = default;
};

/// Voxels carrying `label` with a 6-neighbour of another label or on the
/// volume boundary, in linear index order.
std::vector<Voxel3> extract_surface(const LabeledVolume& v, int label);

/// Squared physical distance (mm^2) from every voxel to the nearest voxel of
/// `sites` (same grid as `dims`). Exact separable transform.
std::vector<double> squared_distance_map(const Extents3& dims, const std::array<double, 3>& spacing,
                                         const std::vector<Voxel3>& sites);

/// Average symmetric surface distance in mm.
double asd(const LabeledVolume& a, const LabeledVolume& b, int label);

struct LobeRow {
    int label = 0;
    std::string name;
    double dsc = 0.0;
    double asd = 0.0;
};

struct LobeReport {
    std::vector<LobeRow> rows;  // RUL, RML, RLL, LUL, LLL
    double mean_dsc = 0.0;
    double mean_asd = 0.0;
};

LobeReport per_lobe_report(const LabeledVolume& pred, const LabeledVolume& ref);

std::string format_lobe_report(const LobeReport& report);
/// lobe,dsc,asd_mm rows with an "Overall" row last.
std::string lobe_report_csv(const LobeReport& report);

}  // namespace plsnet
