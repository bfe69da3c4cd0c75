#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "vmil/config.hpp"
#include "vmil/manifest.hpp"
#include "vmil/metrics.hpp"
#include "vmil/model.hpp"
#include "vmil/trainer.hpp"

namespace vmil {

// Hash over the dataset-defining slice of the config (seed + data section),
// so training-side overrides such as the model variant do not orphan an
// already-synthesized dataset.
inline std::string data_hash(const RunConfig& cfg) {
    nlohmann::json j = {{"seed", cfg.seed},
                        {"data", to_json(cfg).at("data")}};
    const std::string dump = j.dump();
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : dump) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

inline std::string dataset_dir(const RunConfig& cfg) {
    return (std::filesystem::path(cfg.out_dir) / ("dataset_" + data_hash(cfg))).string();
}

inline std::string manifest_path(const RunConfig& cfg) {
    return (std::filesystem::path(dataset_dir(cfg)) / "manifest.jsonl").string();
}

inline std::vector<VideoBag> load_corpus(const RunConfig& cfg) {
    const std::string path = manifest_path(cfg);
    if (!std::filesystem::exists(path))
        throw RuntimeAbort("dataset not found at " + path + "; run the synth command first");
    return read_dataset(path);
}

struct Splits {
    std::vector<VideoBag> train;  // training minus validation carve
    std::vector<VideoBag> val;
    std::vector<VideoBag> test;
};

inline Splits make_splits(const RunConfig& cfg, const std::vector<VideoBag>& bags) {
    auto [train_full, test] = split_train_test(bags, cfg.split_fraction, cfg.seed);
    auto [train, val] = carve_validation(train_full, cfg.training.val_fraction, cfg.training.seed);
    return {std::move(train), std::move(val), std::move(test)};
}

inline std::vector<PredictionRecord> predict_records(const RunConfig& cfg,
                                                     const ModelParams& params,
                                                     const std::vector<VideoBag>& bags) {
    std::vector<PredictionRecord> records;
    records.reserve(bags.size());
    for (const auto& bag : bags) {
        const VideoBag sub = subsample_uniform(bag, cfg.training.sequence_length);
        require(sub.has_features(), "predict_records: bag " + bag.id + " has no features");
        const ForwardResult fwd = forward_variant(cfg.model, params, *sub.features);
        records.push_back(make_record(bag.id, fwd.probs, cfg.eval_threshold, fwd.alpha,
                                      bag.video_label, fwd.split, sub.frame_labels));
    }
    return records;
}

struct ExperimentResult {
    TrainOutcome outcome;
    std::vector<PredictionRecord> records;
    MetricsTable metrics;
    LocalizationScore localization;
};

// Train the configured variant on the deterministic splits and evaluate on
// the held-out test side.
inline ExperimentResult run_experiment(const RunConfig& cfg, const std::vector<VideoBag>& bags) {
    const Splits splits = make_splits(cfg, bags);
    ExperimentResult result;
    result.outcome = train(cfg.model, cfg.training, splits.train, splits.val);
    result.records = predict_records(cfg, result.outcome.params, splits.test);
    result.metrics = evaluate(result.records);
    result.localization = localization_score(result.records, cfg.top_k);
    return result;
}

}  // namespace vmil
