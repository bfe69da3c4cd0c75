#pragma once

#include <cstdint>
#include <fstream>
#include <nlohmann/json.hpp>
#include <set>
#include <string>

#include "vmil/backbone.hpp"
#include "vmil/model.hpp"
#include "vmil/synth.hpp"
#include "vmil/trainer.hpp"
#include "vmil/types.hpp"

namespace vmil {

// One config file drives every command; all constants live here and the
// config hash is embedded in every output filename. Unknown keys are
// rejected so typos cannot silently fall back to defaults.
struct RunConfig {
    std::uint64_t seed = 0;
    SyntheticDatasetConfig data;
    double split_fraction = 0.5;
    BackboneConfig backbone;
    ModelConfig model;
    TrainingConfig training;
    double eval_threshold = 0.5;
    int top_k = 3;
    std::string out_dir = "out";

    void wire_seeds() {
        data.seed = derive_seed(seed, "data");
        backbone.seed = derive_seed(seed, "backbone");
        training.seed = derive_seed(seed, "training");
    }
};

namespace detail {

inline void reject_unknown(const nlohmann::json& j, const std::set<std::string>& allowed,
                           const std::string& section) {
    for (const auto& [key, value] : j.items())
        if (!allowed.count(key))
            throw ConfigError("unknown key '" + key + "' in config section '" + section + "'");
}

template <typename T>
void maybe(const nlohmann::json& j, const char* key, T& out) {
    if (j.contains(key)) {
        try {
            out = j.at(key).get<T>();
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
        }
    }
}

}  // namespace detail

inline RunConfig parse_run_config(const nlohmann::json& j) {
    detail::reject_unknown(j, {"seed", "data", "split_fraction", "backbone", "model", "training",
                               "evaluation", "output"},
                           "<root>");
    if (!j.contains("seed")) throw ConfigError("config: 'seed' is mandatory");
    RunConfig cfg;
    detail::maybe(j, "seed", cfg.seed);
    detail::maybe(j, "split_fraction", cfg.split_fraction);

    if (j.contains("data")) {
        const auto& d = j.at("data");
        detail::reject_unknown(d,
                               {"num_videos", "frames_per_video", "num_classes", "feature_dim",
                                "signal_frame_fraction", "noise_scale", "label_density"},
                               "data");
        detail::maybe(d, "num_videos", cfg.data.num_videos);
        detail::maybe(d, "frames_per_video", cfg.data.frames_per_video);
        detail::maybe(d, "num_classes", cfg.data.num_classes);
        detail::maybe(d, "feature_dim", cfg.data.feature_dim);
        detail::maybe(d, "signal_frame_fraction", cfg.data.signal_frame_fraction);
        detail::maybe(d, "noise_scale", cfg.data.noise_scale);
        detail::maybe(d, "label_density", cfg.data.label_density);
    }
    if (j.contains("backbone")) {
        const auto& b = j.at("backbone");
        detail::reject_unknown(
            b, {"kind", "output_dim", "resize_height", "resize_width", "weights_path"},
            "backbone");
        detail::maybe(b, "kind", cfg.backbone.kind);
        detail::maybe(b, "output_dim", cfg.backbone.output_dim);
        detail::maybe(b, "resize_height", cfg.backbone.resize_height);
        detail::maybe(b, "resize_width", cfg.backbone.resize_width);
        detail::maybe(b, "weights_path", cfg.backbone.weights_path);
    }
    if (j.contains("model")) {
        const auto& m = j.at("model");
        detail::reject_unknown(
            m, {"variant", "hidden_dim", "num_layers", "attention_hidden", "bag_scorer_hidden"},
            "model");
        std::string variant = to_string(cfg.model.variant);
        detail::maybe(m, "variant", variant);
        cfg.model.variant = variant_from_string(variant);
        detail::maybe(m, "hidden_dim", cfg.model.hidden_dim);
        detail::maybe(m, "num_layers", cfg.model.num_layers);
        detail::maybe(m, "attention_hidden", cfg.model.attention_hidden);
        detail::maybe(m, "bag_scorer_hidden", cfg.model.bag_scorer_hidden);
    }
    if (j.contains("training")) {
        const auto& t = j.at("training");
        detail::reject_unknown(t,
                               {"sequence_length", "epochs", "lr_max", "lr_min", "cycle_epochs",
                                "weight_decay", "beta1", "beta2", "lambda", "detection_threshold",
                                "val_fraction", "augment", "unfreeze_backbone"},
                               "training");
        detail::maybe(t, "sequence_length", cfg.training.sequence_length);
        detail::maybe(t, "epochs", cfg.training.epochs);
        detail::maybe(t, "lr_max", cfg.training.lr_max);
        detail::maybe(t, "lr_min", cfg.training.lr_min);
        detail::maybe(t, "cycle_epochs", cfg.training.cycle_epochs);
        detail::maybe(t, "weight_decay", cfg.training.adam.weight_decay);
        detail::maybe(t, "beta1", cfg.training.adam.beta1);
        detail::maybe(t, "beta2", cfg.training.adam.beta2);
        detail::maybe(t, "lambda", cfg.training.lambda);
        detail::maybe(t, "detection_threshold", cfg.training.detection_threshold);
        detail::maybe(t, "val_fraction", cfg.training.val_fraction);
        detail::maybe(t, "augment", cfg.training.augment_pixels);
        detail::maybe(t, "unfreeze_backbone", cfg.training.unfreeze_backbone);
    }
    // The training-table detection threshold is the default decision rule;
    // evaluation.threshold overrides it explicitly.
    cfg.eval_threshold = cfg.training.detection_threshold;
    if (j.contains("evaluation")) {
        const auto& e = j.at("evaluation");
        detail::reject_unknown(e, {"threshold", "top_k"}, "evaluation");
        detail::maybe(e, "threshold", cfg.eval_threshold);
        detail::maybe(e, "top_k", cfg.top_k);
    }
    if (j.contains("output")) {
        const auto& o = j.at("output");
        detail::reject_unknown(o, {"dir"}, "output");
        detail::maybe(o, "dir", cfg.out_dir);
    }

    // Synthetic feature bags feed the model directly, so the model's input
    // width and class count follow the data section.
    cfg.model.feature_dim = cfg.data.feature_dim;
    cfg.model.num_classes = cfg.data.num_classes;
    cfg.wire_seeds();
    cfg.data.validate();
    cfg.model.validate();
    cfg.training.validate();
    if (cfg.eval_threshold < 0.0 || cfg.eval_threshold > 1.0)
        throw ConfigError("evaluation.threshold outside [0,1]");
    if (cfg.top_k < 1) throw ConfigError("evaluation.top_k must be positive");
    if (!(cfg.split_fraction > 0.0 && cfg.split_fraction < 1.0))
        throw ConfigError("split_fraction outside (0,1)");
    return cfg;
}

inline RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config parse error in " + path + ": " + e.what());
    }
    return parse_run_config(j);
}

inline nlohmann::json to_json(const RunConfig& cfg) {
    return {
        {"seed", cfg.seed},
        {"split_fraction", cfg.split_fraction},
        {"data",
         {{"num_videos", cfg.data.num_videos},
          {"frames_per_video", cfg.data.frames_per_video},
          {"num_classes", cfg.data.num_classes},
          {"feature_dim", cfg.data.feature_dim},
          {"signal_frame_fraction", cfg.data.signal_frame_fraction},
          {"noise_scale", cfg.data.noise_scale},
          {"label_density", cfg.data.label_density}}},
        {"backbone",
         {{"kind", cfg.backbone.kind},
          {"output_dim", cfg.backbone.output_dim},
          {"resize_height", cfg.backbone.resize_height},
          {"resize_width", cfg.backbone.resize_width},
          {"weights_path", cfg.backbone.weights_path}}},
        {"model",
         {{"variant", to_string(cfg.model.variant)},
          {"hidden_dim", cfg.model.hidden_dim},
          {"num_layers", cfg.model.num_layers},
          {"attention_hidden", cfg.model.attention_hidden},
          {"bag_scorer_hidden", cfg.model.bag_scorer_hidden}}},
        {"training",
         {{"sequence_length", cfg.training.sequence_length},
          {"epochs", cfg.training.epochs},
          {"lr_max", cfg.training.lr_max},
          {"lr_min", cfg.training.lr_min},
          {"cycle_epochs", cfg.training.cycle_epochs},
          {"weight_decay", cfg.training.adam.weight_decay},
          {"beta1", cfg.training.adam.beta1},
          {"beta2", cfg.training.adam.beta2},
          {"lambda", cfg.training.lambda},
          {"detection_threshold", cfg.training.detection_threshold},
          {"val_fraction", cfg.training.val_fraction},
          {"augment", cfg.training.augment_pixels},
          {"unfreeze_backbone", cfg.training.unfreeze_backbone}}},
        {"evaluation", {{"threshold", cfg.eval_threshold}, {"top_k", cfg.top_k}}},
        {"output", {{"dir", cfg.out_dir}}},
    };
}

// FNV-1a over the canonical (key-sorted) config dump; 16 hex digits.
inline std::string config_hash(const RunConfig& cfg) {
    const std::string dump = to_json(cfg).dump();
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : dump) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace vmil
