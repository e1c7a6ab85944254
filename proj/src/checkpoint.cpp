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

#include "plsnet/checkpoint.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <vector>

#include "plsnet/network.hpp"

namespace plsnet {
namespace {

void put_u32(std::vector<char>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFFu));
}

void put_bytes(std::vector<char>& out, const std::string& s) {
    put_u32(out, static_cast<std::uint32_t>(s.size()));
    out.insert(out.end(), s.begin(), s.end());
}

class Reader {
public:
    Reader(const std::vector<char>& buf, const std::string& path) : buf_(buf), path_(path) {}

    void need(std::size_t n, const char* what) const {
        if (buf_.size() - pos_ < n) {
            throw CheckpointError("checkpoint '" + path_ + "': truncated while reading " + what + " (need " +
                                  std::to_string(n) + " bytes at offset " + std::to_string(pos_) + ", have " +
                                  std::to_string(buf_.size() - pos_) + ")");
        }
    }
    std::uint32_t u32(const char* what) {
        need(4, what);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(buf_[pos_ + i])) << (8 * i);
        pos_ += 4;
        return v;
    }
    std::uint8_t u8(const char* what) {
        need(1, what);
        return static_cast<std::uint8_t>(buf_[pos_++]);
    }
    std::string bytes(std::size_t n, const char* what) {
        need(n, what);
        std::string s(buf_.data() + pos_, n);
        pos_ += n;
        return s;
    }
    std::size_t remaining() const { return buf_.size() - pos_; }

private:
    const std::vector<char>& buf_;
    std::string path_;
    std::size_t pos_ = 0;
};

}  // namespace

void save_checkpoint(const std::string& path, const NetworkConfig& cfg, const ParamStore<float>& params) {
    if (!PlsNet<float>(cfg).params().same_layout(params)) {
        throw std::invalid_argument("save_checkpoint: parameters do not match the layout of the given config");
    }
    std::vector<char> out(std::begin(kCheckpointMagic), std::end(kCheckpointMagic));
    put_u32(out, kCheckpointVersion);
    put_bytes(out, nlohmann::json(cfg).dump());
    put_u32(out, static_cast<std::uint32_t>(params.size()));
    for (const auto& e : params.entries()) {
        put_bytes(out, e.name);
        out.push_back(static_cast<char>(e.role));
        put_u32(out, static_cast<std::uint32_t>(e.shape.size()));
        for (int d : e.shape) put_u32(out, static_cast<std::uint32_t>(d));
        for (float v : e.value) put_u32(out, std::bit_cast<std::uint32_t>(v));
    }
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write checkpoint '" + path + "'");
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!f) throw std::runtime_error("write failed for checkpoint '" + path + "'");
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open checkpoint '" + path + "'");
    const std::vector<char> buf((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    Reader r(buf, path);

    const std::string magic = r.bytes(sizeof(kCheckpointMagic), "magic");
    if (std::memcmp(magic.data(), kCheckpointMagic, sizeof(kCheckpointMagic)) != 0) {
        throw CheckpointError("checkpoint '" + path + "': bad magic");
    }
    const std::uint32_t version = r.u32("version");
    if (version != kCheckpointVersion) {
        throw CheckpointError("checkpoint '" + path + "': unsupported version " + std::to_string(version) +
                              " (expected " + std::to_string(kCheckpointVersion) + ")");
    }

    Checkpoint ck;
    const std::string cfg_text = r.bytes(r.u32("config length"), "config");
    try {
        ck.config = nlohmann::json::parse(cfg_text).get<NetworkConfig>();
    } catch (const std::exception& e) {
        throw CheckpointError("checkpoint '" + path + "': bad config: " + e.what());
    }

    const ParamStore<float> expected = PlsNet<float>(ck.config).params();
    const std::uint32_t count = r.u32("tensor count");
    if (count != expected.size()) {
        throw CheckpointError("checkpoint '" + path + "': " + std::to_string(count) + " tensors, config expects " +
                              std::to_string(expected.size()));
    }
    for (std::uint32_t t = 0; t < count; ++t) {
        const std::string name = r.bytes(r.u32("name length"), "name");
        const auto role = static_cast<ParamRole>(r.u8("role"));
        const std::uint32_t rank = r.u32("rank");
        std::vector<int> shape;
        for (std::uint32_t i = 0; i < rank; ++i) shape.push_back(static_cast<int>(r.u32("dims")));
        const auto& want = expected[t];
        if (name != want.name || role != want.role || shape != want.shape) {
            throw CheckpointError("checkpoint '" + path + "': tensor " + std::to_string(t) + " '" + name +
                                  "' does not match expected '" + want.name + "'");
        }
        const std::size_t i = ck.params.add(name, shape, role);
        for (float& v : ck.params[i].value) v = std::bit_cast<float>(r.u32("tensor values"));
    }
    if (r.remaining() != 0) {
        throw CheckpointError("checkpoint '" + path + "': " + std::to_string(r.remaining()) + " trailing bytes");
    }
    return ck;
}

}  // namespace plsnet
