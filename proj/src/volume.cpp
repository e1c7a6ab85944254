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

#include "plsnet/volume.hpp"

#include <bit>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <vector>

#include "json.hpp"

namespace plsnet {

namespace fs = std::filesystem;

namespace {

std::string body_name(const std::string& header_path) {
    fs::path p(header_path);
    if (p.extension() == ".json") p.replace_extension(".raw");
    else p += ".raw";
    return p.filename().string();
}

fs::path body_path(const std::string& header_path, const std::string& body) {
    return fs::path(header_path).parent_path() / body;
}

void write_file(const fs::path& path, const std::string& bytes) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write '" + path.string() + "'");
    f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw std::runtime_error("write failed for '" + path.string() + "'");
}

void write_header(const std::string& path, const VolumeHeader& h) {
    const bool label = h.kind == VolumeKind::kLabel;
    nlohmann::json j{{"format_version", h.format_version},
                     {"dims", {h.dims.h, h.dims.w, h.dims.d}},
                     {"spacing", h.spacing},
                     {"kind", label ? "label" : "intensity"},
                     {"dtype", label ? "uint16" : "float32"},
                     {"endianness", "little"},
                     {"body", h.body}};
    write_file(path, j.dump(2) + "\n");
}

std::string read_body(const std::string& header_path, const VolumeHeader& h, std::size_t bytes_per_voxel) {
    const fs::path p = body_path(header_path, h.body);
    std::ifstream f(p, std::ios::binary);
    if (!f) throw VolumeFormatError("cannot open volume body '" + p.string() + "'");
    std::string bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    const std::size_t expected = h.dims.voxels() * bytes_per_voxel;
    if (bytes.size() != expected) {
        throw VolumeFormatError("volume body '" + p.string() + "': size mismatch, expected " +
                                std::to_string(expected) + " bytes, got " + std::to_string(bytes.size()));
    }
    return bytes;
}

}  // namespace

VolumeHeader read_volume_header(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open volume header '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw VolumeFormatError("volume header '" + path + "': " + e.what());
    }
    VolumeHeader h;
    try {
        h.format_version = j.at("format_version").get<int>();
        if (h.format_version != kVolumeFormatVersion) {
            throw VolumeFormatError("volume header '" + path + "': unknown format_version " +
                                    std::to_string(h.format_version));
        }
        const auto dims = j.at("dims").get<std::array<int, 3>>();
        h.dims = {dims[0], dims[1], dims[2]};
        h.spacing = j.at("spacing").get<std::array<double, 3>>();
        const std::string kind = j.at("kind").get<std::string>();
        const std::string dtype = j.at("dtype").get<std::string>();
        if (kind == "intensity" && dtype == "float32") {
            h.kind = VolumeKind::kIntensity;
        } else if (kind == "label" && dtype == "uint16") {
            h.kind = VolumeKind::kLabel;
        } else {
            throw VolumeFormatError("volume header '" + path + "': unsupported kind/dtype " + kind + "/" + dtype);
        }
        if (j.value("endianness", "little") != "little") {
            throw VolumeFormatError("volume header '" + path + "': only little-endian bodies are supported");
        }
        h.body = j.at("body").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw VolumeFormatError("volume header '" + path + "': " + e.what());
    }
    if (h.dims.h < 1 || h.dims.w < 1 || h.dims.d < 1) {
        throw VolumeFormatError("volume header '" + path + "': dims must be >= 1, got " + h.dims.str());
    }
    for (double s : h.spacing) {
        if (!(s > 0.0)) throw VolumeFormatError("volume header '" + path + "': spacing must be positive");
    }
    return h;
}

void save_volume(const std::string& path, const ImageVolume& v) {
    if (v.image.channels() != 1) throw std::invalid_argument("save_volume: intensity volume must have 1 channel");
    VolumeHeader h{kVolumeFormatVersion, v.dims(), v.spacing, VolumeKind::kIntensity, body_name(path)};
    std::string bytes;
    bytes.reserve(v.image.size() * 4);
    for (float x : v.image.values()) {
        const auto u = std::bit_cast<std::uint32_t>(x);
        for (int i = 0; i < 4; ++i) bytes.push_back(static_cast<char>((u >> (8 * i)) & 0xFFu));
    }
    write_file(body_path(path, h.body), bytes);
    write_header(path, h);
}

void save_volume(const std::string& path, const LabeledVolume& v) {
    v.validate(1 << 16);
    VolumeHeader h{kVolumeFormatVersion, v.dims, v.spacing, VolumeKind::kLabel, body_name(path)};
    std::string bytes;
    bytes.reserve(v.labels.size() * 2);
    for (std::uint16_t x : v.labels) {
        bytes.push_back(static_cast<char>(x & 0xFFu));
        bytes.push_back(static_cast<char>(x >> 8));
    }
    write_file(body_path(path, h.body), bytes);
    write_header(path, h);
}

ImageVolume load_image(const std::string& path) {
    const VolumeHeader h = read_volume_header(path);
    if (h.kind != VolumeKind::kIntensity) {
        throw VolumeFormatError("volume '" + path + "' holds labels, expected an intensity volume");
    }
    const std::string bytes = read_body(path, h, 4);
    ImageVolume v{Tensor4(Shape4{h.dims.h, h.dims.w, h.dims.d, 1}), h.spacing};
    auto& out = v.image.values();
    for (std::size_t i = 0; i < out.size(); ++i) {
        std::uint32_t u = 0;
        for (int b = 0; b < 4; ++b) u |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[4 * i + b])) << (8 * b);
        out[i] = std::bit_cast<float>(u);
    }
    return v;
}

LabeledVolume load_labels(const std::string& path) {
    const VolumeHeader h = read_volume_header(path);
    if (h.kind != VolumeKind::kLabel) {
        throw VolumeFormatError("volume '" + path + "' holds intensities, expected a label volume");
    }
    const std::string bytes = read_body(path, h, 2);
    LabeledVolume v(h.dims, h.spacing);
    for (std::size_t i = 0; i < v.labels.size(); ++i) {
        v.labels[i] = static_cast<std::uint16_t>(static_cast<unsigned char>(bytes[2 * i]) |
                                                 (static_cast<unsigned char>(bytes[2 * i + 1]) << 8));
    }
    return v;
}

}  // namespace plsnet
