#pragma once

#include <fstream>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "vmil/metrics.hpp"
#include "vmil/trainer.hpp"
#include "vmil/types.hpp"

namespace vmil {

inline nlohmann::json metrics_to_json(const MetricsTable& t) {
    nlohmann::json per_class = nlohmann::json::array();
    for (std::size_t c = 0; c < t.per_class.size(); ++c) {
        const auto& m = t.per_class[c];
        per_class.push_back({{"class", c},
                             {"tp", m.tp},
                             {"fp", m.fp},
                             {"fn", m.fn},
                             {"tn", m.tn},
                             {"accuracy", m.accuracy},
                             {"precision", m.precision},
                             {"recall", m.recall},
                             {"f1", m.f1},
                             {"sensitivity", m.recall},
                             {"specificity", m.specificity}});
    }
    auto macro = [](const MacroMetrics& m) {
        return nlohmann::json{{"accuracy", m.accuracy},   {"precision", m.precision},
                              {"recall", m.recall},       {"f1", m.f1},
                              {"sensitivity", m.recall},  {"specificity", m.specificity}};
    };
    return {{"per_class", per_class},
            {"macro_all_classes", macro(t.macro_all)},
            {"macro_classes_with_support", macro(t.macro_with_support)}};
}

// Per-class table mirroring the per-pathology result layout; sensitivity is
// reported as a synonym column of recall.
inline void write_metrics_csv(const std::string& path, const MetricsTable& t) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw RuntimeAbort("cannot open for write: " + path);
    out.precision(6);
    out << "class,accuracy,precision,recall,f1,sensitivity,specificity\n";
    for (std::size_t c = 0; c < t.per_class.size(); ++c) {
        const auto& m = t.per_class[c];
        out << "class_" << c << "," << m.accuracy << "," << m.precision << "," << m.recall << ","
            << m.f1 << "," << m.recall << "," << m.specificity << "\n";
    }
    auto row = [&](const char* name, const MacroMetrics& m) {
        out << name << "," << m.accuracy << "," << m.precision << "," << m.recall << "," << m.f1
            << "," << m.recall << "," << m.specificity << "\n";
    };
    row("macro_all_classes", t.macro_all);
    row("macro_classes_with_support", t.macro_with_support);
    if (!out) throw RuntimeAbort("short write: " + path);
}

// Method-by-metric comparison table (one row per variant).
struct AblationRow {
    std::string method;
    MacroMetrics metrics;
};

inline void write_ablation_csv(const std::string& path, const std::vector<AblationRow>& rows) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw RuntimeAbort("cannot open for write: " + path);
    out.precision(6);
    out << "method,precision,recall,f1,specificity,accuracy\n";
    for (const auto& r : rows)
        out << r.method << "," << r.metrics.precision << "," << r.metrics.recall << ","
            << r.metrics.f1 << "," << r.metrics.specificity << "," << r.metrics.accuracy << "\n";
    if (!out) throw RuntimeAbort("short write: " + path);
}

inline nlohmann::json record_to_json(const PredictionRecord& r) {
    nlohmann::json j;
    j["id"] = r.id;
    j["probs"] = std::vector<double>(r.probs.data(), r.probs.data() + r.probs.size());
    j["predicted"] = r.predicted.sorted();
    j["ground_truth"] = r.ground_truth.sorted();
    j["alpha"] = std::vector<double>(r.alpha.data(), r.alpha.data() + r.alpha.size());
    if (r.split) {
        j["bag_positive"] = r.split->positive_indices;
        j["bag_negative"] = r.split->negative_indices;
    }
    if (r.frame_ground_truth) {
        nlohmann::json fl = nlohmann::json::array();
        for (const auto& l : *r.frame_ground_truth) fl.push_back(l.sorted());
        j["frame_ground_truth"] = fl;
    }
    return j;
}

inline void write_records_jsonl(const std::string& path,
                                const std::vector<PredictionRecord>& records) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw RuntimeAbort("cannot open for write: " + path);
    for (const auto& r : records) out << record_to_json(r).dump() << "\n";
    if (!out) throw RuntimeAbort("short write: " + path);
}

// One structured record per epoch: {epoch, train loss, val loss, LR, wall time}.
inline void write_epoch_log(const std::string& path, const std::vector<EpochRecord>& log) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw RuntimeAbort("cannot open for write: " + path);
    for (const auto& e : log) {
        nlohmann::json j = {{"epoch", e.epoch},
                            {"train_loss", e.train_loss},
                            {"val_loss", e.val_loss},
                            {"lr", e.lr},
                            {"wall_seconds", e.wall_seconds}};
        out << j.dump() << "\n";
    }
    if (!out) throw RuntimeAbort("short write: " + path);
}

inline void write_confusion_csv(const std::string& path, const Matrix& confusion) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw RuntimeAbort("cannot open for write: " + path);
    const int k = static_cast<int>(confusion.rows());
    out << "true_class";
    for (int c = 0; c < k; ++c) out << ",pred_class_" << c;
    out << ",pred_none\n";
    for (int r = 0; r < k; ++r) {
        out << "class_" << r;
        for (Eigen::Index c = 0; c < confusion.cols(); ++c) out << "," << confusion(r, c);
        out << "\n";
    }
    if (!out) throw RuntimeAbort("short write: " + path);
}

}  // namespace vmil
