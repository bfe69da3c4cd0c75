#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "vmil/label_set.hpp"
#include "vmil/rng.hpp"
#include "vmil/types.hpp"
#include "vmil/video_bag.hpp"

namespace vmil {

// Weak video label from per-frame labels: the union over frames. A class is
// present at video level iff some frame carries it; the empty union is the
// "no pathology" case.
inline LabelSet derive_weak_label(const std::vector<LabelSet>& frame_labels) {
    require(!frame_labels.empty(), "derive_weak_label: empty frame-label list");
    LabelSet out(frame_labels.front().num_classes());
    for (const auto& fl : frame_labels) out.unite(fl);
    return out;
}

// Video label from an N x K frame-score matrix: class k is predicted iff the
// per-class max over frames exceeds the threshold (strict >). Serves as the
// brute-force oracle for video prediction from frame scores.
inline LabelSet max_aggregate_label(const Matrix& frame_scores, double threshold) {
    require(threshold >= 0.0 && threshold <= 1.0, "max_aggregate_label: threshold outside [0,1]");
    require(frame_scores.rows() >= 1, "max_aggregate_label: no frames");
    require((frame_scores.array() >= 0.0).all() && (frame_scores.array() <= 1.0).all(),
            "max_aggregate_label: scores outside [0,1]");
    const int k = static_cast<int>(frame_scores.cols());
    LabelSet out(k);
    for (int c = 0; c < k; ++c)
        if (frame_scores.col(c).maxCoeff() > threshold) out.insert(c);
    return out;
}

struct SyntheticDatasetConfig {
    int num_videos = 455;
    int frames_per_video = 30;
    int num_classes = 14;
    int feature_dim = 32;
    double signal_frame_fraction = 0.3;  // fraction of frames carrying the planted signal
    double noise_scale = 0.1;
    double label_density = 1.74;         // mean labels per video (clamped Poisson)
    std::uint64_t seed = 0;

    void validate() const {
        if (num_videos < 1 || frames_per_video < 1 || num_classes < 1 || feature_dim < 1)
            throw ConfigError("synthetic dataset: all counts must be positive");
        if (!(signal_frame_fraction > 0.0 && signal_frame_fraction <= 1.0))
            throw ConfigError("synthetic dataset: signal_frame_fraction outside (0,1]");
        if (noise_scale < 0.0) throw ConfigError("synthetic dataset: negative noise_scale");
        if (label_density <= 0.0) throw ConfigError("synthetic dataset: non-positive label_density");
    }
};

// The planted feature layout, reproducible from the config alone so tests can
// reconstruct what the generator embedded.
struct SyntheticSignatures {
    Matrix class_signature;  // K x D
    Vector background;       // D

    static SyntheticSignatures from_config(const SyntheticDatasetConfig& cfg) {
        Rng rng(derive_seed(cfg.seed, "signatures"));
        SyntheticSignatures s;
        s.class_signature = Matrix(cfg.num_classes, cfg.feature_dim);
        for (int k = 0; k < cfg.num_classes; ++k)
            for (int d = 0; d < cfg.feature_dim; ++d) s.class_signature(k, d) = rng.normal();
        s.background = Vector(cfg.feature_dim);
        for (int d = 0; d < cfg.feature_dim; ++d) s.background[d] = 0.25 * rng.normal();
        return s;
    }
};

// Number of planted frames and the start of the centered contiguous block.
inline int planted_block_size(int frames, double fraction) {
    return std::min(frames, static_cast<int>(std::ceil(fraction * frames)));
}
inline int planted_block_start(int frames, int block) { return (frames - block) / 2; }

// Synthetic planted-signal corpus. Every video carries a non-empty label set
// (size ~ Poisson(label_density) clamped to [1, K]); a centered contiguous
// block of ceil(fraction*N) frames holds the summed class signatures plus
// background and noise, the remaining frames hold background plus noise only.
// Deterministic in (config, seed).
inline std::vector<VideoBag> generate_dataset(const SyntheticDatasetConfig& cfg) {
    cfg.validate();
    const auto sig = SyntheticSignatures::from_config(cfg);
    Rng rng(derive_seed(cfg.seed, "videos"));

    const int n = cfg.frames_per_video;
    const int block = planted_block_size(n, cfg.signal_frame_fraction);
    const int start = planted_block_start(n, block);

    std::vector<VideoBag> bags;
    bags.reserve(cfg.num_videos);
    for (int v = 0; v < cfg.num_videos; ++v) {
        const int want = std::clamp(rng.poisson(cfg.label_density), 1, cfg.num_classes);
        std::vector<int> pool(cfg.num_classes);
        for (int k = 0; k < cfg.num_classes; ++k) pool[k] = k;
        rng.shuffle(pool);
        LabelSet label(cfg.num_classes, std::vector<int>(pool.begin(), pool.begin() + want));

        Vector planted = sig.background;
        for (int k : label.classes()) planted += sig.class_signature.row(k).transpose();

        VideoBag bag;
        bag.id = "synth-" + std::to_string(v);
        bag.features = Matrix(n, cfg.feature_dim);
        bag.frame_labels = std::vector<LabelSet>(n, LabelSet(cfg.num_classes));
        for (int f = 0; f < n; ++f) {
            const bool in_block = f >= start && f < start + block;
            const Vector& base = in_block ? planted : sig.background;
            for (int d = 0; d < cfg.feature_dim; ++d)
                (*bag.features)(f, d) = base[d] + cfg.noise_scale * rng.normal();
            if (in_block) (*bag.frame_labels)[f] = label;
        }
        bag.video_label = derive_weak_label(*bag.frame_labels);
        bags.push_back(std::move(bag));
    }
    return bags;
}

// Random partition at the given fraction under the constraint that every
// class appears at least once on each side. Rejection sampling first, then a
// deterministic repair pass; a class covered by fewer than two bags is
// unsplittable and reported by name.
inline std::pair<std::vector<VideoBag>, std::vector<VideoBag>> split_train_test(
    const std::vector<VideoBag>& bags, double fraction, std::uint64_t seed) {
    require(fraction > 0.0 && fraction < 1.0, "split_train_test: fraction outside (0,1)");
    require(bags.size() >= 2, "split_train_test: need at least 2 bags");

    std::map<int, int> support;
    for (const auto& b : bags)
        for (int c : b.video_label.classes()) ++support[c];
    for (const auto& [cls, count] : support)
        if (count < 2)
            throw InfeasibleSplit("class " + std::to_string(cls) + " appears in only " +
                                  std::to_string(count) + " bag(s); cannot cover both sides");

    const int total = static_cast<int>(bags.size());
    const int train_size =
        std::clamp(static_cast<int>(std::lround(fraction * total)), 1, total - 1);

    auto covered_both_sides = [&](const std::vector<bool>& in_train) {
        std::map<int, std::pair<bool, bool>> seen;
        for (int i = 0; i < total; ++i)
            for (int c : bags[i].video_label.classes())
                (in_train[i] ? seen[c].first : seen[c].second) = true;
        for (const auto& [cls, sides] : seen)
            if (!sides.first || !sides.second) return false;
        return true;
    };

    Rng rng(derive_seed(seed, "split"));
    std::vector<int> order(total);
    for (int i = 0; i < total; ++i) order[i] = i;

    std::vector<bool> in_train(total, false);
    bool ok = false;
    for (int attempt = 0; attempt < 1000 && !ok; ++attempt) {
        rng.shuffle(order);
        std::fill(in_train.begin(), in_train.end(), false);
        for (int i = 0; i < train_size; ++i) in_train[order[i]] = true;
        ok = covered_both_sides(in_train);
    }

    if (!ok) {
        // Repair: for each class missing on a side, swap in a bag that carries
        // it without uncovering anything, preserving the split sizes.
        auto side_count = [&](int cls, bool train_side) {
            int n = 0;
            for (int i = 0; i < total; ++i)
                if (in_train[i] == train_side && bags[i].video_label.contains(cls)) ++n;
            return n;
        };
        for (const auto& [cls, count] : support) {
            for (bool side : {true, false}) {
                if (side_count(cls, side) > 0) continue;
                bool moved = false;
                for (int i = 0; i < total && !moved; ++i) {
                    if (in_train[i] == side || !bags[i].video_label.contains(cls)) continue;
                    bool safe = true;
                    for (int c2 : bags[i].video_label.classes())
                        if (side_count(c2, !side) < 2) safe = false;
                    if (!safe) continue;
                    // Swap with any donor from the target side to keep sizes.
                    for (int j = 0; j < total && !moved; ++j) {
                        if (in_train[j] != side) continue;
                        bool donor_safe = true;
                        for (int c2 : bags[j].video_label.classes())
                            if (side_count(c2, side) < 2) donor_safe = false;
                        if (!donor_safe) continue;
                        in_train[i] = side;
                        in_train[j] = !side;
                        moved = true;
                    }
                }
                if (!moved)
                    throw InfeasibleSplit("class " + std::to_string(cls) +
                                          ": no coverage-preserving assignment found");
            }
        }
        if (!covered_both_sides(in_train))
            throw InfeasibleSplit("split repair failed to cover every class on both sides");
    }

    std::vector<VideoBag> train, test;
    for (int i = 0; i < total; ++i) (in_train[i] ? train : test).push_back(bags[i]);
    return {std::move(train), std::move(test)};
}

}  // namespace vmil
