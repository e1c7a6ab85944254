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

#include <cstdint>
#include <functional>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace plsnet {

enum class ParamRole : std::uint8_t {
    kConvWeight = 0,
    kBnGamma = 1,
    kBnBeta = 2,
    kBnRunningMean = 3,
    kBnRunningVar = 4,
};

inline bool is_trainable(ParamRole role) {
    return role == ParamRole::kConvWeight || role == ParamRole::kBnGamma || role == ParamRole::kBnBeta;
}

template <typename T>
struct ParamEntry {
    std::string name;
    std::vector<int> shape;
    ParamRole role = ParamRole::kConvWeight;
    std::vector<T> value;

    bool trainable() const { return is_trainable(role); }
};

inline std::size_t element_count(const std::vector<int>& shape) {
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                           [](std::size_t a, int b) { return a * static_cast<std::size_t>(b); });
}

/// Ordered, named collection of every tensor a network owns: convolution
/// weights, BN affine parameters (trainable) and BN running statistics.
/// Registration order is the serialisation order.
template <typename T>
class ParamStore {
public:
    std::size_t add(std::string name, std::vector<int> shape, ParamRole role, T fill = T{0}) {
        if (index_.count(name)) throw std::invalid_argument("duplicate parameter '" + name + "'");
        const std::size_t n = element_count(shape);
        index_.emplace(name, entries_.size());
        entries_.push_back({std::move(name), std::move(shape), role, std::vector<T>(n, fill)});
        return entries_.size() - 1;
    }

    std::size_t index_of(std::string_view name) const {
        auto it = index_.find(std::string(name));
        if (it == index_.end()) throw std::out_of_range("unknown parameter '" + std::string(name) + "'");
        return it->second;
    }
    bool contains(std::string_view name) const { return index_.count(std::string(name)) != 0; }

    ParamEntry<T>& operator[](std::size_t i) { return entries_[i]; }
    const ParamEntry<T>& operator[](std::size_t i) const { return entries_[i]; }
    std::span<const T> values(std::size_t i) const { return entries_[i].value; }
    std::span<T> values(std::size_t i) { return entries_[i].value; }

    std::size_t size() const { return entries_.size(); }
    const std::vector<ParamEntry<T>>& entries() const { return entries_; }
    std::vector<ParamEntry<T>>& entries() { return entries_; }

    /// Number of trainable scalars.
    std::size_t trainable_count() const {
        std::size_t n = 0;
        for (const auto& e : entries_) {
            if (e.trainable()) n += e.value.size();
        }
        return n;
    }

    template <typename U>
    ParamStore<U> cast() const {
        ParamStore<U> out;
        for (const auto& e : entries_) {
            const std::size_t i = out.add(e.name, e.shape, e.role);
            std::copy(e.value.begin(), e.value.end(), out[i].value.begin());
        }
        return out;
    }

    /// Same names, shapes and roles in the same order.
    bool same_layout(const ParamStore& o) const {
        if (o.size() != size()) return false;
        for (std::size_t i = 0; i < size(); ++i) {
            if (entries_[i].name != o[i].name || entries_[i].shape != o[i].shape || entries_[i].role != o[i].role) {
                return false;
            }
        }
        return true;
    }

private:
    std::vector<ParamEntry<T>> entries_;
    std::unordered_map<std::string, std::size_t> index_;
};

/// Gradient buffers aligned with a ParamStore. Non-trainable entries stay zero.
template <typename T>
class ParamGrads {
public:
    ParamGrads() = default;
    explicit ParamGrads(const ParamStore<T>& store) {
        grads_.reserve(store.size());
        for (const auto& e : store.entries()) grads_.emplace_back(e.value.size(), T{0});
    }

    void add(std::size_t index, std::span<const T> g) {
        auto& dst = grads_.at(index);
        if (dst.size() != g.size()) {
            throw std::invalid_argument("gradient size mismatch for parameter " + std::to_string(index));
        }
        for (std::size_t i = 0; i < g.size(); ++i) dst[i] += g[i];
    }

    std::span<const T> operator[](std::size_t i) const { return grads_[i]; }
    std::span<T> operator[](std::size_t i) { return grads_[i]; }
    std::size_t size() const { return grads_.size(); }

private:
    std::vector<std::vector<T>> grads_;
};

}  // namespace plsnet
