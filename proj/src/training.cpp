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

#include "plsnet/training.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>
#include <stdexcept>

#include "plsnet/ops.hpp"

namespace plsnet {

void TrainConfig::validate() const {
    auto fail = [](const std::string& m) { throw std::invalid_argument("train config: " + m); };
    if (!(lr > 0.0)) fail("lr must be positive");
    if (!(beta1 >= 0.0 && beta1 < 1.0)) fail("beta1 must be in [0, 1)");
    if (!(beta2 >= 0.0 && beta2 < 1.0)) fail("beta2 must be in [0, 1)");
    if (!(eps > 0.0)) fail("eps must be positive");
    if (patience < 1) fail("patience must be >= 1");
    if (max_epochs < 1) fail("max_epochs must be >= 1");
    if (!(init_sigma > 0.0)) fail("init_sigma must be positive");
}

void to_json(nlohmann::json& j, const TrainConfig& c) {
    j = nlohmann::json{{"lr", c.lr},
                       {"beta1", c.beta1},
                       {"beta2", c.beta2},
                       {"eps", c.eps},
                       {"patience", c.patience},
                       {"max_epochs", c.max_epochs},
                       {"seed", c.seed},
                       {"init_sigma", c.init_sigma},
                       {"checkpointing", c.checkpointing}};
}

void from_json(const nlohmann::json& j, TrainConfig& c) {
    if (!j.is_object()) throw std::invalid_argument("train config: expected a JSON object");
    static const std::set<std::string> known{"lr",         "beta1", "beta2",      "eps",          "patience",
                                             "max_epochs", "seed",  "init_sigma", "checkpointing"};
    for (const auto& [k, v] : j.items()) {
        if (!known.count(k)) throw std::invalid_argument("train config: unknown key '" + k + "'");
    }
    TrainConfig out;
    auto get = [&](const char* key, auto& field) {
        if (j.contains(key)) j.at(key).get_to(field);
    };
    get("lr", out.lr);
    get("beta1", out.beta1);
    get("beta2", out.beta2);
    get("eps", out.eps);
    get("patience", out.patience);
    get("max_epochs", out.max_epochs);
    get("seed", out.seed);
    get("init_sigma", out.init_sigma);
    get("checkpointing", out.checkpointing);
    out.validate();
    c = out;
}

void init_weights(const TrainConfig& cfg, ParamStore<float>& params, std::mt19937_64& rng) {
    cfg.validate();
    std::normal_distribution<double> normal(0.0, cfg.init_sigma);
    for (auto& e : params.entries()) {
        switch (e.role) {
            case ParamRole::kConvWeight:
                for (float& v : e.value) v = static_cast<float>(normal(rng));
                break;
            case ParamRole::kBnGamma:
            case ParamRole::kBnRunningVar:
                std::fill(e.value.begin(), e.value.end(), 1.0f);
                break;
            case ParamRole::kBnBeta:
            case ParamRole::kBnRunningMean:
                std::fill(e.value.begin(), e.value.end(), 0.0f);
                break;
        }
    }
}

AdamState AdamState::create(const ParamStore<float>& params, const TrainConfig& cfg) {
    AdamState s;
    s.lr = cfg.lr;
    s.beta1 = cfg.beta1;
    s.beta2 = cfg.beta2;
    s.eps = cfg.eps;
    for (const auto& e : params.entries()) {
        const std::size_t n = e.trainable() ? e.value.size() : 0;
        s.m.emplace_back(n, 0.0f);
        s.v.emplace_back(n, 0.0f);
    }
    return s;
}

void adam_step(ParamStore<float>& params, const ParamGrads<float>& grads, AdamState& s) {
    if (grads.size() != params.size() || s.m.size() != params.size() || s.v.size() != params.size()) {
        throw std::invalid_argument("adam_step: state/gradients do not mirror the parameter store");
    }
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (!params[i].trainable()) continue;
        if (grads[i].size() != params[i].value.size() || s.m[i].size() != params[i].value.size() ||
            s.v[i].size() != params[i].value.size()) {
            throw std::invalid_argument("adam_step: shape mismatch for '" + params[i].name + "'");
        }
    }
    ++s.t;
    const double c1 = 1.0 - std::pow(s.beta1, static_cast<double>(s.t));
    const double c2 = 1.0 - std::pow(s.beta2, static_cast<double>(s.t));
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (!params[i].trainable()) continue;
        auto& p = params[i].value;
        auto g = grads[i];
        auto& m = s.m[i];
        auto& v = s.v[i];
        for (std::size_t k = 0; k < p.size(); ++k) {
            const double gk = g[k];
            const double mk = s.beta1 * m[k] + (1.0 - s.beta1) * gk;
            const double vk = s.beta2 * v[k] + (1.0 - s.beta2) * gk * gk;
            m[k] = static_cast<float>(mk);
            v[k] = static_cast<float>(vk);
            p[k] = static_cast<float>(p[k] - s.lr * (mk / c1) / (std::sqrt(vk / c2) + s.eps));
        }
    }
}

bool EarlyStopState::observe(double val_loss, int epoch) {
    if (val_loss < best) {
        best = val_loss;
        best_epoch = epoch;
        since_improvement = 0;
        return true;
    }
    ++since_improvement;
    return false;
}

std::string stop_reason_name(StopReason r) {
    switch (r) {
        case StopReason::kPatience: return "patience";
        case StopReason::kMaxEpochs: return "max-epochs";
        case StopReason::kCallback: return "callback";
    }
    return "?";
}

double mean_loss(PlsNet<float>& net, const std::vector<Sample>& samples) {
    if (samples.empty()) throw std::invalid_argument("mean_loss: no samples");
    double sum = 0.0;
    for (const auto& s : samples) {
        sum += cross_entropy_loss(net.forward(s.image.image, NormMode::kInfer), s.labels);
    }
    return sum / static_cast<double>(samples.size());
}

FitResult fit(const std::vector<Sample>& train, const std::vector<Sample>& val, const NetworkConfig& net_cfg,
              const TrainConfig& cfg, const EpochCallback& on_epoch) {
    if (train.empty()) throw std::invalid_argument("fit: empty training set");
    if (val.empty()) throw std::invalid_argument("fit: empty validation set");
    cfg.validate();
    for (const auto* set : {&train, &val}) {
        for (const auto& s : *set) {
            const Shape4& sh = s.image.image.shape();
            if (sh.c != 1 || Extents3{sh.h, sh.w, sh.d} != s.labels.dims) {
                throw std::invalid_argument("fit: sample '" + s.name + "' image " + sh.str() +
                                            " does not match labels " + s.labels.dims.str());
            }
            s.labels.validate(net_cfg.classes);
        }
    }

    PlsNet<float> net(net_cfg);
    net.set_checkpointing(cfg.checkpointing);
    std::mt19937_64 rng(cfg.seed);
    init_weights(cfg, net.params(), rng);
    AdamState adam = AdamState::create(net.params(), cfg);
    EarlyStopState stop;

    FitResult result;
    result.params = net.params();
    for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        const auto t0 = std::chrono::steady_clock::now();
        double train_loss = 0.0;
        for (const auto& s : train) {
            NetTrace<float> trace;
            const Tensor4 prob = net.forward(s.image.image, NormMode::kTrain, &trace);
            train_loss += cross_entropy_loss(prob, s.labels);
            const ParamGrads<float> grads =
                net.backward_logits(trace, softmax_cross_entropy_backward(prob, s.labels));
            adam_step(net.params(), grads, adam);
        }
        EpochRecord rec;
        rec.epoch = epoch;
        rec.train_loss = train_loss / static_cast<double>(train.size());
        rec.val_loss = mean_loss(net, val);
        rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        result.history.push_back(rec);

        if (stop.observe(rec.val_loss, epoch)) result.params = net.params();
        if (on_epoch && on_epoch(rec, net)) {
            result.reason = StopReason::kCallback;
            break;
        }
        if (stop.should_stop(cfg.patience)) {
            result.reason = StopReason::kPatience;
            break;
        }
    }
    result.best_epoch = stop.best_epoch;
    result.best_val_loss = stop.best;
    return result;
}

std::string loss_history_csv(const std::vector<EpochRecord>& history) {
    std::ostringstream os;
    os << "epoch,train_loss,val_loss,seconds\n";
    char line[160];
    for (const auto& r : history) {
        std::snprintf(line, sizeof line, "%d,%.9g,%.9g,%.3f\n", r.epoch, r.train_loss, r.val_loss, r.seconds);
        os << line;
    }
    return os.str();
}

}  // namespace plsnet
