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

#include "plsnet/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "plsnet/analysis.hpp"
#include "plsnet/checkpoint.hpp"
#include "plsnet/metrics.hpp"
#include "plsnet/network.hpp"
#include "plsnet/phantom.hpp"
#include "plsnet/preprocess.hpp"
#include "plsnet/training.hpp"
#include "plsnet/volume.hpp"

namespace plsnet {

namespace fs = std::filesystem;

namespace {

/// Bad flags, missing or malformed config files: exit 2.
class UsageError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

void require_file(const std::string& path, const char* what) {
    if (!fs::is_regular_file(path)) throw UsageError(std::string(what) + " '" + path + "' not found");
}

NetworkConfig network_config_arg(const std::string& path) {
    if (path.empty()) return NetworkConfig{};
    require_file(path, "network config");
    return load_network_config(path);
}

void echo_config(std::ostream& out, const nlohmann::json& j) { out << "config: " << j.dump() << "\n"; }

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write '" + path.string() + "'");
    f << text;
    if (!f) throw std::runtime_error("write failed for '" + path.string() + "'");
}

Sample load_sample(const std::string& image, const std::string& labels) {
    Sample s;
    s.name = image;
    s.image = preprocess(load_image(image));
    s.labels = resample_isotropic(load_labels(labels));
    if (s.image.dims() != s.labels.dims) {
        throw std::runtime_error("'" + image + "' resamples to " + s.image.dims().str() + " but '" + labels +
                                 "' resamples to " + s.labels.dims.str());
    }
    return s;
}

// ---------------------------------------------------------------------------

struct AnalyzeArgs {
    std::string config;
    std::vector<int> input_size{384, 384, 384};
    bool json = false;
};

int cmd_analyze(const AnalyzeArgs& a, std::ostream& out) {
    const NetworkConfig cfg = network_config_arg(a.config);
    if (a.input_size.size() != 3) throw UsageError("--input-size expects H,W,D");
    const Extents3 in{a.input_size[0], a.input_size[1], a.input_size[2]};
    if (in.h < 1 || in.w < 1 || in.d < 1) throw UsageError("--input-size entries must be >= 1");
    const CostReport r = network_cost_report(cfg, in);
    if (a.json) {
        out << nlohmann::json{{"config", cfg}, {"report", cost_report_json(r)}}.dump(2) << "\n";
    } else {
        echo_config(out, nlohmann::json{{"network", cfg}, {"input_size", a.input_size}});
        out << format_cost_report(r);
    }
    return kExitOk;
}

struct PhantomArgs {
    std::string spec;
    std::string out;
    int count = 1;
    std::optional<std::uint64_t> seed;
};

int cmd_phantom(const PhantomArgs& a, std::ostream& out) {
    PhantomSpec spec;
    if (!a.spec.empty()) {
        require_file(a.spec, "phantom spec");
        spec = load_phantom_spec(a.spec);
    }
    if (a.count < 1) throw UsageError("--count must be >= 1");
    const std::uint64_t seed = a.seed.value_or(spec.seed);
    echo_config(out, nlohmann::json{{"spec", spec}, {"count", a.count}, {"seed", seed}, {"out", a.out}});

    const fs::path dir(a.out);
    fs::create_directories(dir);
    std::ostringstream manifest;
    manifest << "# image\tlabels\tseed\n";
    for (int i = 0; i < a.count; ++i) {
        PhantomSpec s = spec;
        s.seed = seed + static_cast<std::uint64_t>(i);
        const Phantom ph = generate_phantom(s);
        char stem[64];
        std::snprintf(stem, sizeof stem, "phantom_%03d", i);
        const std::string image = std::string(stem) + "_image.json";
        const std::string labels = std::string(stem) + "_labels.json";
        save_volume((dir / image).string(), ph.image);
        save_volume((dir / labels).string(), ph.labels);
        manifest << image << "\t" << labels << "\t" << s.seed << "\n";
        out << "wrote " << (dir / image).string() << " " << (dir / labels).string() << " (seed " << s.seed << ")\n";
    }
    write_text(dir / "manifest.tsv", manifest.str());
    return kExitOk;
}

struct TrainArgs {
    std::string train;
    std::string val;
    std::string config;
    std::string train_config;
    std::string out;
    std::string loss_csv;
    std::optional<int> max_epochs;
    std::optional<int> patience;
    std::optional<std::uint64_t> seed;
};

int cmd_train(const TrainArgs& a, std::ostream& out) {
    const NetworkConfig net_cfg = network_config_arg(a.config);
    TrainConfig tc;
    if (!a.train_config.empty()) {
        require_file(a.train_config, "train config");
        std::ifstream f(a.train_config);
        try {
            tc = nlohmann::json::parse(f).get<TrainConfig>();
        } catch (const nlohmann::json::exception& e) {
            throw UsageError("train config '" + a.train_config + "': " + e.what());
        }
    }
    if (a.max_epochs) tc.max_epochs = *a.max_epochs;
    if (a.patience) tc.patience = *a.patience;
    if (a.seed) tc.seed = *a.seed;
    tc.validate();

    require_file(a.train, "train list");
    require_file(a.val, "validation list");
    const auto train_list = read_volume_list(a.train);
    const auto val_list = read_volume_list(a.val);
    if (train_list.empty()) throw UsageError("train list '" + a.train + "' is empty");
    if (val_list.empty()) throw UsageError("validation list '" + a.val + "' is empty");
    const std::string loss_csv = a.loss_csv.empty() ? a.out + ".loss.csv" : a.loss_csv;
    echo_config(out, nlohmann::json{{"network", net_cfg},
                                    {"train", tc},
                                    {"train_list", a.train},
                                    {"val_list", a.val},
                                    {"out", a.out},
                                    {"loss_csv", loss_csv}});

    std::vector<Sample> train, val;
    for (const auto& [img, lab] : train_list) train.push_back(load_sample(img, lab));
    for (const auto& [img, lab] : val_list) val.push_back(load_sample(img, lab));

    const FitResult r = fit(train, val, net_cfg, tc, [&](const EpochRecord& e, PlsNet<float>&) {
        char line[160];
        std::snprintf(line, sizeof line, "epoch %d  train_loss %.6f  val_loss %.6f  (%.1fs)\n", e.epoch,
                      e.train_loss, e.val_loss, e.seconds);
        out << line << std::flush;
        return false;
    });
    save_checkpoint(a.out, net_cfg, r.params);
    write_text(loss_csv, loss_history_csv(r.history));
    out << "stopped: " << stop_reason_name(r.reason) << " after " << r.history.size() << " epochs; best epoch "
        << r.best_epoch << " val_loss " << r.best_val_loss << "\n";
    out << "checkpoint: " << a.out << "\nloss history: " << loss_csv << "\n";
    return kExitOk;
}

struct InferArgs {
    std::string ckpt;
    std::string in;
    std::string out;
};

int cmd_infer(const InferArgs& a, std::ostream& out) {
    require_file(a.ckpt, "checkpoint");
    require_file(a.in, "input volume");
    Checkpoint ck = load_checkpoint(a.ckpt);
    echo_config(out, nlohmann::json{{"network", ck.config}, {"ckpt", a.ckpt}, {"in", a.in}, {"out", a.out}});
    PlsNet<float> net(ck.config, std::move(ck.params));

    const auto t0 = std::chrono::steady_clock::now();
    const VolumeHeader native = read_volume_header(a.in);
    const ImageVolume x = preprocess(load_image(a.in));
    const Tensor4 prob = net.forward(x.image, NormMode::kInfer);
    const LabeledVolume labels = resample_labels_to_native(argmax_labels(prob, x.spacing), native);
    save_volume(a.out, labels);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    char line[128];
    std::snprintf(line, sizeof line, "wrote %s (%s), %.2f s\n", a.out.c_str(), labels.dims.str().c_str(), secs);
    out << line;
    return kExitOk;
}

struct EvaluateArgs {
    std::string pred;
    std::string ref;
    std::string csv;
};

int cmd_evaluate(const EvaluateArgs& a, std::ostream& out) {
    require_file(a.pred, "prediction");
    require_file(a.ref, "reference");
    echo_config(out, nlohmann::json{{"pred", a.pred}, {"ref", a.ref}, {"csv", a.csv}});
    const LabeledVolume pred = load_labels(a.pred);
    const LabeledVolume ref = load_labels(a.ref);
    const LobeReport r = per_lobe_report(pred, ref);
    out << format_lobe_report(r);
    if (!a.csv.empty()) write_text(a.csv, lobe_report_csv(r));
    return kExitOk;
}

struct InspectArgs {
    std::string ckpt;
    std::string in;
    std::string layer;
    int slice = 0;
    std::string out;
    std::string format = "pgm";
};

int cmd_inspect(const InspectArgs& a, std::ostream& out, std::ostream& err) {
    require_file(a.ckpt, "checkpoint");
    require_file(a.in, "input volume");
    if (a.format != "pgm" && a.format != "csv") throw UsageError("--format must be pgm or csv");
    Checkpoint ck = load_checkpoint(a.ckpt);
    PlsNet<float> net(ck.config, std::move(ck.params));
    const std::vector<std::string> names = net.layer_names();
    if (std::find(names.begin(), names.end(), a.layer) == names.end()) {
        err << "unknown layer '" << a.layer << "'; available layers:\n";
        for (const auto& n : names) err << "  " << n << "\n";
        return kExitUsage;
    }
    echo_config(out, nlohmann::json{{"network", ck.config},
                                    {"ckpt", a.ckpt},
                                    {"in", a.in},
                                    {"layer", a.layer},
                                    {"slice", a.slice},
                                    {"out", a.out},
                                    {"format", a.format}});

    const ImageVolume x = preprocess(load_image(a.in));
    Tensor4 maps;
    net.forward(x.image, NormMode::kInfer, nullptr, [&](std::string_view name, const Tensor4& t) {
        if (name == a.layer) maps = t;
    });
    const Shape4& s = maps.shape();
    if (a.slice < 0 || a.slice >= s.h) {
        throw UsageError("--slice " + std::to_string(a.slice) + " outside [0, " + std::to_string(s.h) +
                         ") for layer '" + a.layer + "' " + s.str());
    }
    const fs::path prefix(a.out);
    if (prefix.has_parent_path()) fs::create_directories(prefix.parent_path());

    for (int c = 0; c < s.c; ++c) {
        float lo = maps(a.slice, 0, 0, c);
        float hi = lo;
        for (int w = 0; w < s.w; ++w) {
            for (int d = 0; d < s.d; ++d) {
                lo = std::min(lo, maps(a.slice, w, d, c));
                hi = std::max(hi, maps(a.slice, w, d, c));
            }
        }
        auto norm = [&](float v) { return hi > lo ? (v - lo) / (hi - lo) : 0.5f; };
        char suffix[32];
        std::snprintf(suffix, sizeof suffix, "_c%03d.%s", c, a.format.c_str());
        const std::string path = a.out + suffix;
        std::string body;
        if (a.format == "pgm") {
            body = "P5\n" + std::to_string(s.d) + " " + std::to_string(s.w) + "\n255\n";
            for (int w = 0; w < s.w; ++w) {
                for (int d = 0; d < s.d; ++d) {
                    body.push_back(static_cast<char>(std::lround(255.0f * norm(maps(a.slice, w, d, c)))));
                }
            }
        } else {
            std::ostringstream os;
            char num[32];
            for (int w = 0; w < s.w; ++w) {
                for (int d = 0; d < s.d; ++d) {
                    std::snprintf(num, sizeof num, "%s%.6f", d ? "," : "", norm(maps(a.slice, w, d, c)));
                    os << num;
                }
                os << "\n";
            }
            body = os.str();
        }
        write_text(path, body);
    }
    out << "wrote " << s.c << " " << a.format << " files for layer '" << a.layer << "' " << s.str() << ", slice "
        << a.slice << "\n";
    return kExitOk;
}

}  // namespace

std::vector<std::pair<std::string, std::string>> read_volume_list(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open list '" + path + "'");
    const fs::path base = fs::path(path).parent_path();
    std::vector<std::pair<std::string, std::string>> out;
    std::string line;
    int lineno = 0;
    while (std::getline(f, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::istringstream is(line);
        std::string image, labels;
        if (!(is >> image)) continue;
        if (!(is >> labels)) {
            throw UsageError("list '" + path + "' line " + std::to_string(lineno) + ": expected image and labels");
        }
        auto resolve = [&](const std::string& p) {
            const fs::path q(p);
            return (q.is_absolute() ? q : base / q).string();
        };
        out.emplace_back(resolve(image), resolve(labels));
    }
    return out;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Lobe segmentation toolkit: cost analysis, phantoms, training, inference, evaluation"};
    app.name("plsnet");
    app.require_subcommand(1);

    AnalyzeArgs analyze;
    auto* s_analyze = app.add_subcommand("analyze", "Parameter/MAC/receptive-field report for a network config");
    s_analyze->add_option("--config", analyze.config, "Network config JSON (defaults if omitted)");
    s_analyze->add_option("--input-size", analyze.input_size, "Input extents H,W,D")->delimiter(',')->expected(3);
    s_analyze->add_flag("--json", analyze.json, "Emit JSON instead of text");

    PhantomArgs phantom;
    auto* s_phantom = app.add_subcommand("phantom", "Write synthetic lobe phantoms");
    s_phantom->add_option("--spec", phantom.spec, "Phantom spec JSON (defaults if omitted)");
    s_phantom->add_option("--out", phantom.out, "Output directory")->required();
    s_phantom->add_option("--count", phantom.count, "Number of phantoms");
    s_phantom->add_option("--seed", phantom.seed, "Base seed; phantom i uses seed + i");

    TrainArgs train;
    auto* s_train = app.add_subcommand("train", "Train on listed volumes");
    s_train->add_option("--train", train.train, "Training list")->required();
    s_train->add_option("--val", train.val, "Validation list")->required();
    s_train->add_option("--config", train.config, "Network config JSON");
    s_train->add_option("--train-config", train.train_config, "Training hyperparameters JSON");
    s_train->add_option("--out", train.out, "Checkpoint path")->required();
    s_train->add_option("--loss-csv", train.loss_csv, "Loss history CSV (default <out>.loss.csv)");
    s_train->add_option("--max-epochs", train.max_epochs, "Epoch limit");
    s_train->add_option("--patience", train.patience, "Early-stopping patience in epochs");
    s_train->add_option("--seed", train.seed, "Initialisation seed");

    InferArgs infer;
    auto* s_infer = app.add_subcommand("infer", "Segment one volume");
    s_infer->add_option("--ckpt", infer.ckpt, "Checkpoint")->required();
    s_infer->add_option("--in", infer.in, "Input intensity volume header")->required();
    s_infer->add_option("--out", infer.out, "Output label volume header")->required();

    EvaluateArgs evaluate;
    auto* s_evaluate = app.add_subcommand("evaluate", "Per-lobe DSC and ASD");
    s_evaluate->add_option("--pred", evaluate.pred, "Predicted labels")->required();
    s_evaluate->add_option("--ref", evaluate.ref, "Reference labels")->required();
    s_evaluate->add_option("--csv", evaluate.csv, "Also write the table as CSV");

    InspectArgs inspect;
    auto* s_inspect = app.add_subcommand("inspect", "Dump one layer's feature maps as 2D slices");
    s_inspect->add_option("--ckpt", inspect.ckpt, "Checkpoint")->required();
    s_inspect->add_option("--in", inspect.in, "Input intensity volume header")->required();
    s_inspect->add_option("--layer", inspect.layer, "Layer name")->required();
    s_inspect->add_option("--slice", inspect.slice, "Index along the first axis, at the layer's resolution");
    s_inspect->add_option("--out", inspect.out, "Output prefix; files are <prefix>_cNNN.<format>")->required();
    s_inspect->add_option("--format", inspect.format, "pgm or csv");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (s_analyze->parsed()) return cmd_analyze(analyze, out);
        if (s_phantom->parsed()) return cmd_phantom(phantom, out);
        if (s_train->parsed()) return cmd_train(train, out);
        if (s_infer->parsed()) return cmd_infer(infer, out);
        if (s_evaluate->parsed()) return cmd_evaluate(evaluate, out);
        if (s_inspect->parsed()) return cmd_inspect(inspect, out, err);
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitUsage;
}

}  // namespace plsnet
