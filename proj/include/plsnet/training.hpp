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
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "json.hpp"
#include "plsnet/config.hpp"
#include "plsnet/labels.hpp"
#include "plsnet/network.hpp"
#include "plsnet/params.hpp"
#include "plsnet/volume.hpp"

namespace plsnet {

struct TrainConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    int patience = 20;
    int max_epochs = 300;
    std::uint64_t seed = 42;
    double init_sigma = 0.01;
    /// Memory-efficient dense blocks (same gradients, less retained state).
    bool checkpointing = true;

    void validate() const;
    friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

void to_json(nlohmann::json& j, const TrainConfig& c);
void from_json(const nlohmann::json& j, TrainConfig& c);

/// Convolution weights ~ N(0, sigma^2) in registration order; BN gamma 1,
/// beta 0, running mean 0, running variance 1.
void init_weights(const TrainConfig& cfg, ParamStore<float>& params, std::mt19937_64& rng);

struct AdamState {
    std::vector<std::vector<float>> m;
    std::vector<std::vector<float>> v;
    std::int64_t t = 0;
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;

    static AdamState create(const ParamStore<float>& params, const TrainConfig& cfg);
};

/// One bias-corrected Adam update of every trainable tensor. Throws
/// std::invalid_argument when the state or gradients do not mirror `params`.
void adam_step(ParamStore<float>& params, const ParamGrads<float>& grads, AdamState& state);

struct EarlyStopState {
    double best = std::numeric_limits<double>::infinity();
    int best_epoch = 0;
    int since_improvement = 0;

    /// Records one epoch's validation loss. Returns true when the loss is a
    /// strict improvement.
    bool observe(double val_loss, int epoch);
    bool should_stop(int patience) const { return since_improvement >= patience; }
};

/// Already preprocessed image plus labels on the same grid.
struct Sample {
    std::string name;
    ImageVolume image;
    LabeledVolume labels;
};

struct EpochRecord {
    int epoch = 0;
    double train_loss = 0.0;
    double val_loss = 0.0;
    double seconds = 0.0;
};

enum class StopReason { kPatience, kMaxEpochs, kCallback };
std::string stop_reason_name(StopReason r);

struct FitResult {
    ParamStore<float> params;  // lowest validation loss seen
    std::vector<EpochRecord> history;
    StopReason reason = StopReason::kMaxEpochs;
    int best_epoch = 0;
    double best_val_loss = 0.0;
};

/// Called after every epoch with the live network; returning true stops training.
using EpochCallback = std::function<bool(const EpochRecord&, PlsNet<float>&)>;

/// Batch size 1, volumes in the given order, validation loss in infer mode
/// after each epoch. Throws std::invalid_argument on an empty training set.
FitResult fit(const std::vector<Sample>& train, const std::vector<Sample>& val, const NetworkConfig& net_cfg,
              const TrainConfig& cfg, const EpochCallback& on_epoch = {});

/// Mean categorical cross-entropy of `net` over `samples` in infer mode.
double mean_loss(PlsNet<float>& net, const std::vector<Sample>& samples);

/// epoch,train_loss,val_loss,seconds
std::string loss_history_csv(const std::vector<EpochRecord>& history);

}  // namespace plsnet
