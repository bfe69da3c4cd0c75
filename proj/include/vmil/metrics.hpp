#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "vmil/bag_split.hpp"
#include "vmil/label_set.hpp"
#include "vmil/types.hpp"

namespace vmil {

// One evaluated video: probabilities, the thresholded prediction, the
// attention vector, optional bag-split membership and (synthetic data) the
// hidden per-frame ground truth.
struct PredictionRecord {
    std::string id;
    Vector probs;
    LabelSet predicted;
    Vector alpha;
    std::optional<BagSplit> split;
    LabelSet ground_truth;
    std::optional<std::vector<LabelSet>> frame_ground_truth;
};

// Builds a record whose predicted set is exactly {k : prob_k > threshold}.
inline PredictionRecord make_record(std::string id, const Vector& probs, double threshold,
                                    const Vector& alpha, const LabelSet& ground_truth,
                                    std::optional<BagSplit> split = {},
                                    std::optional<std::vector<LabelSet>> frame_gt = {}) {
    const int k = static_cast<int>(probs.size());
    require(ground_truth.num_classes() == k, "make_record: class-count mismatch");
    PredictionRecord r;
    r.id = std::move(id);
    r.probs = probs;
    r.predicted = LabelSet(k);
    for (int c = 0; c < k; ++c)
        if (probs[c] > threshold) r.predicted.insert(c);
    r.alpha = alpha;
    r.split = std::move(split);
    r.ground_truth = ground_truth;
    r.frame_ground_truth = std::move(frame_gt);
    return r;
}

struct ClassMetrics {
    long tp = 0, fp = 0, fn = 0, tn = 0;
    double accuracy = 0.0, precision = 0.0, recall = 0.0, f1 = 0.0, specificity = 0.0;
};

struct MacroMetrics {
    double accuracy = 0.0, precision = 0.0, recall = 0.0, f1 = 0.0, specificity = 0.0;
};

struct MetricsTable {
    std::vector<ClassMetrics> per_class;
    MacroMetrics macro_all;           // unweighted mean over every class
    MacroMetrics macro_with_support;  // mean over classes with TP+FN > 0
};

inline double safe_ratio(long num, long den) {
    return den > 0 ? static_cast<double>(num) / static_cast<double>(den) : 0.0;
}

// Per-class video-level counts from thresholded predictions, with the
// metric conventions of the per-class result tables: zero-denominator
// cells report 0, macro averages are unweighted means.
inline MetricsTable evaluate(const std::vector<PredictionRecord>& records) {
    require(!records.empty(), "evaluate: no records");
    const int k = records.front().ground_truth.num_classes();
    for (const auto& r : records)
        require(r.ground_truth.num_classes() == k && r.predicted.num_classes() == k,
                "evaluate: inconsistent class count across records");

    MetricsTable table;
    table.per_class.resize(k);
    for (int c = 0; c < k; ++c) {
        ClassMetrics& m = table.per_class[c];
        for (const auto& r : records) {
            const bool truth = r.ground_truth.contains(c);
            const bool pred = r.predicted.contains(c);
            if (truth && pred) ++m.tp;
            else if (!truth && pred) ++m.fp;
            else if (truth && !pred) ++m.fn;
            else ++m.tn;
        }
        m.precision = safe_ratio(m.tp, m.tp + m.fp);
        m.recall = safe_ratio(m.tp, m.tp + m.fn);
        m.specificity = safe_ratio(m.tn, m.tn + m.fp);
        m.accuracy = safe_ratio(m.tp + m.tn, m.tp + m.tn + m.fp + m.fn);
        m.f1 = (m.precision + m.recall) > 0.0
                   ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
                   : 0.0;
    }

    auto macro = [&](bool support_only) {
        MacroMetrics out;
        int counted = 0;
        for (const auto& m : table.per_class) {
            if (support_only && m.tp + m.fn == 0) continue;
            out.accuracy += m.accuracy;
            out.precision += m.precision;
            out.recall += m.recall;
            out.f1 += m.f1;
            out.specificity += m.specificity;
            ++counted;
        }
        if (counted > 0) {
            out.accuracy /= counted;
            out.precision /= counted;
            out.recall /= counted;
            out.f1 /= counted;
            out.specificity /= counted;
        }
        return out;
    };
    table.macro_all = macro(false);
    table.macro_with_support = macro(true);
    return table;
}

struct LocalizationScore {
    double argmax_hit_rate = 0.0;
    double topk_hit_rate = 0.0;
    double mean_attention_on_positive = 0.0;
    int counted = 0;
    int skipped = 0;  // records without frame ground truth
};

// Frame-localization quality against synthetic per-frame ground truth: how
// often the argmax-attention frame (or any of the top-k) lands on a frame
// with a positive label, and the attention mass such frames receive.
inline LocalizationScore localization_score(const std::vector<PredictionRecord>& records,
                                            int k_top = 3) {
    require(k_top >= 1, "localization_score: k_top must be positive");
    LocalizationScore s;
    double mass = 0.0;
    for (const auto& r : records) {
        if (!r.frame_ground_truth) {
            ++s.skipped;
            continue;
        }
        const auto& fl = *r.frame_ground_truth;
        std::vector<int> positive;
        for (std::size_t i = 0; i < fl.size(); ++i)
            if (!fl[i].empty()) positive.push_back(static_cast<int>(i));
        if (positive.empty()) {
            ++s.skipped;
            continue;
        }
        require(static_cast<Eigen::Index>(fl.size()) == r.alpha.size(),
                "localization_score: alpha/frame-label length mismatch for " + r.id);
        ++s.counted;

        std::vector<int> by_alpha(fl.size());
        std::iota(by_alpha.begin(), by_alpha.end(), 0);
        std::stable_sort(by_alpha.begin(), by_alpha.end(),
                         [&](int a, int b) { return r.alpha[a] > r.alpha[b]; });
        auto is_positive = [&](int idx) { return !fl[idx].empty(); };
        if (is_positive(by_alpha.front())) s.argmax_hit_rate += 1.0;
        const int k = std::min<int>(k_top, static_cast<int>(by_alpha.size()));
        for (int i = 0; i < k; ++i)
            if (is_positive(by_alpha[i])) {
                s.topk_hit_rate += 1.0;
                break;
            }
        double m = 0.0;
        for (int idx : positive) m += r.alpha[idx];
        mass += m;
    }
    if (s.counted > 0) {
        s.argmax_hit_rate /= s.counted;
        s.topk_hit_rate /= s.counted;
        s.mean_attention_on_positive = mass / s.counted;
    }
    return s;
}

// Multi-label confusion counts, row per true class. Column K is the "none"
// bucket for videos with an empty prediction set; otherwise every
// (true class, predicted class) pair of a video is incremented.
inline Matrix confusion_matrix(const std::vector<PredictionRecord>& records) {
    require(!records.empty(), "confusion_matrix: no records");
    const int k = records.front().ground_truth.num_classes();
    Matrix m = Matrix::Zero(k, k + 1);
    for (const auto& r : records) {
        for (int g : r.ground_truth.classes()) {
            if (r.predicted.empty()) {
                m(g, k) += 1.0;
            } else {
                for (int p : r.predicted.classes()) m(g, p) += 1.0;
            }
        }
    }
    return m;
}

inline Matrix row_normalized(const Matrix& m) {
    Matrix out = m;
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        const double sum = m.row(r).sum();
        if (sum > 0.0) out.row(r) /= sum;
    }
    return out;
}

// Attention-image exponent: 0.0001 + 1/alpha, capped at 1e4 (alpha -> 0
// renders black). alpha = 1 is within 1e-4 of the identity.
inline double attention_exponent(double alpha) {
    require(alpha >= 0.0 && alpha <= 1.0, "attention_exponent: alpha outside [0,1]");
    if (alpha <= 0.0) return 1e4;
    return std::min(1e4, 1e-4 + 1.0 / alpha);
}

// Per-pixel power encoding of Fig-style attention images: I^(0.0001+1/alpha)
// maps [0,1] pixels to [0,1], monotone in alpha for fixed I.
inline Matrix encode_attention_frame(const Matrix& pixels, double alpha) {
    require((pixels.array() >= 0.0).all() && (pixels.array() <= 1.0).all(),
            "encode_attention_frame: pixels outside [0,1]");
    const double e = attention_exponent(alpha);
    return pixels.array().pow(e).matrix();
}

}  // namespace vmil
