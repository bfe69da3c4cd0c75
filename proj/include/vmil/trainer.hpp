#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iostream>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "vmil/adam.hpp"
#include "vmil/backbone.hpp"
#include "vmil/checkpoint.hpp"
#include "vmil/image_ops.hpp"
#include "vmil/model.hpp"
#include "vmil/synth.hpp"
#include "vmil/types.hpp"

namespace vmil {

struct TrainingConfig {
    int sequence_length = 30;
    int epochs = 500;
    double lr_max = 1e-4;   // the configured base rate is the cycle peak
    double lr_min = 1e-5;
    int cycle_epochs = 10;
    AdamConfig adam{};      // beta = (0.9, 0.999), weight decay 1e-4
    double lambda = 1.0;
    double detection_threshold = 0.5;
    double val_fraction = 0.1;
    bool augment_pixels = true;
    bool unfreeze_backbone = false;
    std::uint64_t seed = 0;

    void validate() const {
        if (sequence_length < 1) throw ConfigError("training: sequence_length must be positive");
        if (epochs < 0 || epochs > 500) throw ConfigError("training: epochs outside [0, 500]");
        if (lr_max <= 0.0 || lr_min <= 0.0 || lr_min > lr_max)
            throw ConfigError("training: need 0 < lr_min <= lr_max");
        if (cycle_epochs < 1) throw ConfigError("training: cycle_epochs must be positive");
        if (lambda < 0.0) throw ConfigError("training: lambda must be >= 0");
        if (detection_threshold < 0.0 || detection_threshold > 1.0)
            throw ConfigError("training: detection_threshold outside [0,1]");
        if (val_fraction < 0.0 || val_fraction >= 1.0)
            throw ConfigError("training: val_fraction outside [0,1)");
    }
};

// Evenly spaced frame indices covering the first and last frame:
// idx_i = round(i * (N-1) / (target-1)). Identity when N <= target.
inline std::vector<int> subsample_indices(int n, int target) {
    require(n >= 1 && target >= 1, "subsample_indices: non-positive length");
    std::vector<int> idx;
    if (n <= target) {
        idx.resize(n);
        std::iota(idx.begin(), idx.end(), 0);
        return idx;
    }
    idx.reserve(target);
    if (target == 1) {
        idx.push_back(0);
        return idx;
    }
    const double step = static_cast<double>(n - 1) / (target - 1);
    for (int i = 0; i < target; ++i)
        idx.push_back(static_cast<int>(std::floor(i * step + 0.5)));
    return idx;
}

inline VideoBag subsample_uniform(const VideoBag& bag, int target_len = 30) {
    const int n = bag.frame_count();
    if (n <= target_len) return bag;
    const auto idx = subsample_indices(n, target_len);
    VideoBag out;
    out.id = bag.id;
    out.video_label = bag.video_label;
    if (bag.has_features()) {
        Matrix f(static_cast<Eigen::Index>(idx.size()), bag.features->cols());
        for (std::size_t i = 0; i < idx.size(); ++i) f.row(static_cast<Eigen::Index>(i)) = bag.features->row(idx[i]);
        out.features = std::move(f);
    } else {
        const VideoTensor& src = *bag.frames;
        VideoTensor t(static_cast<int>(idx.size()), src.height, src.width, src.channels);
        for (std::size_t i = 0; i < idx.size(); ++i)
            std::copy_n(src.data.begin() + static_cast<std::ptrdiff_t>(idx[i] * src.frame_size()),
                        src.frame_size(), t.data.begin() + static_cast<std::ptrdiff_t>(i * src.frame_size()));
        out.frames = std::move(t);
    }
    if (bag.frame_labels) {
        std::vector<LabelSet> fl;
        for (int i : idx) fl.push_back((*bag.frame_labels)[i]);
        out.frame_labels = std::move(fl);
    }
    return out;
}

// Horizontal/vertical flip with probability 1/2 each and a centered random
// zoom (crop scale in [0.8, 1.0], resized back), applied to every frame
// identically. Labels are unchanged. Three draws are consumed per call
// regardless of which transforms fire.
inline VideoBag augment(const VideoBag& bag, Rng& rng) {
    const bool do_h = rng.uniform() < 0.5;
    const bool do_v = rng.uniform() < 0.5;
    const double zoom = rng.uniform(0.8, 1.0);
    if (!bag.has_pixels()) {
        std::cerr << "[vmil] warning: augmentation requested for feature-only bag " << bag.id
                  << "; skipped\n";
        return bag;
    }
    VideoBag out = bag;
    if (do_h) out.frames = flip_horizontal(*out.frames);
    if (do_v) out.frames = flip_vertical(*out.frames);
    out.frames = center_zoom(*out.frames, zoom);
    return out;
}

struct EpochRecord {
    int epoch;
    double train_loss;
    double val_loss;
    double lr;
    double wall_seconds;
};

struct TrainOutcome {
    ModelParams params;       // parameters of the lowest-validation-error epoch
    int best_epoch = 0;
    double best_val_loss = 0.0;
    std::vector<EpochRecord> log;
    std::string rng_state;    // training stream state at the end of the run
};

namespace detail {

inline Matrix bag_features(const VideoBag& bag, const FeatureExtractor* extractor) {
    if (bag.has_features()) return *bag.features;
    require(extractor != nullptr, "trainer: pixel bag " + bag.id + " needs a feature extractor");
    return extractor->extract(*bag.frames);
}

}  // namespace detail

// Mean composite loss over a bag set with fixed parameters.
inline double evaluate_loss(const ModelConfig& mcfg, const ModelParams& params,
                            const std::vector<VideoBag>& bags, double lambda, int sequence_length,
                            const FeatureExtractor* extractor = nullptr) {
    require(!bags.empty(), "evaluate_loss: empty bag set");
    double total = 0.0;
    for (const auto& bag : bags) {
        const VideoBag sub = subsample_uniform(bag, sequence_length);
        const Matrix x = detail::bag_features(sub, extractor);
        const ForwardResult fwd = forward_variant(mcfg, params, x);
        total += variant_loss(mcfg, fwd, bag.video_label, params, lambda);
    }
    return total / static_cast<double>(bags.size());
}

// Batch-size-1 training with Adam under a triangular cyclic learning rate.
// Deterministic in (configs, seed); returns the parameters of the epoch with
// the lowest validation loss (the initialization counts as epoch 0).
inline TrainOutcome train(const ModelConfig& mcfg, const TrainingConfig& tcfg,
                          const std::vector<VideoBag>& train_bags,
                          const std::vector<VideoBag>& val_bags,
                          FeatureExtractor* extractor = nullptr) {
    mcfg.validate();
    tcfg.validate();
    require(!train_bags.empty() && !val_bags.empty(), "train: empty split");

    SyntheticProjector* projector = dynamic_cast<SyntheticProjector*>(extractor);
    if (tcfg.unfreeze_backbone && projector == nullptr)
        throw ConfigError("train: unfreeze_backbone requires the synthetic projector backbone");

    ModelParams params = init_model(mcfg, derive_seed(tcfg.seed, "init"));
    auto param_refs = tensor_refs(params);
    if (tcfg.unfreeze_backbone)
        param_refs.push_back({"backbone.map", projector->map().data(), projector->map().rows(),
                              projector->map().cols()});

    Adam optimizer(param_refs, tcfg.adam);
    Rng shuffle_rng(derive_seed(tcfg.seed, "shuffle"));
    Rng augment_rng(derive_seed(tcfg.seed, "augment"));

    const bool any_pixels =
        std::any_of(train_bags.begin(), train_bags.end(), [](const auto& b) { return b.has_pixels(); });
    const bool do_augment = tcfg.augment_pixels && any_pixels;
    if (tcfg.augment_pixels && !any_pixels && !train_bags.empty())
        std::cerr << "[vmil] warning: augmentation enabled but the training set has no pixel bags; "
                     "skipped\n";

    TrainOutcome out;
    out.best_val_loss = evaluate_loss(mcfg, params, val_bags, tcfg.lambda, tcfg.sequence_length,
                                      extractor);
    out.best_epoch = 0;
    out.params = params;

    std::vector<int> order(train_bags.size());
    std::iota(order.begin(), order.end(), 0);

    for (int epoch = 1; epoch <= tcfg.epochs; ++epoch) {
        const auto t0 = std::chrono::steady_clock::now();
        const double lr = cyclic_lr(epoch - 1, tcfg.lr_min, tcfg.lr_max, tcfg.cycle_epochs);
        shuffle_rng.shuffle(order);

        double epoch_loss = 0.0;
        for (int bag_index : order) {
            VideoBag bag = subsample_uniform(train_bags[bag_index], tcfg.sequence_length);
            if (do_augment && bag.has_pixels()) bag = augment(bag, augment_rng);
            try {
                const Matrix x = detail::bag_features(bag, extractor);

                ModelCache cache;
                const ForwardResult fwd = forward_variant(mcfg, params, x, &cache);
                const double vloss = video_loss(fwd.probs, bag.video_label);
                double sloss = 0.0;
                if (tcfg.lambda != 0.0 && fwd.split)
                    sloss = self_sup_loss(*fwd.split, params.bag, &cache.selfsup);
                const double loss =
                    fwd.split && tcfg.lambda != 0.0 ? vloss + tcfg.lambda * sloss : vloss;
                if (!std::isfinite(loss))
                    throw RuntimeAbort("non-finite loss (video=" + std::to_string(vloss) +
                                       ", self_sup=" + std::to_string(sloss) + ")");
                epoch_loss += loss;

                ModelParams grads = zeros_like(params);
                Matrix dX;
                backward_variant(mcfg, params, x, cache, fwd, bag.video_label, tcfg.lambda, grads,
                                 tcfg.unfreeze_backbone ? &dX : nullptr);
                auto grad_refs = tensor_refs(grads);
                Matrix backbone_grad;
                if (tcfg.unfreeze_backbone) {
                    backbone_grad = projector->map_gradient(*bag.frames, dX);
                    grad_refs.push_back({"backbone.map", backbone_grad.data(), backbone_grad.rows(),
                                         backbone_grad.cols()});
                }
                optimizer.step(param_refs, grad_refs, lr);
            } catch (const ContractViolation& e) {
                throw RuntimeAbort("training aborted at epoch " + std::to_string(epoch) + ", bag " +
                                   bag.id + ": " + e.what());
            } catch (const RuntimeAbort& e) {
                throw RuntimeAbort("training aborted at epoch " + std::to_string(epoch) + ", bag " +
                                   bag.id + ": " + e.what());
            }
        }
        epoch_loss /= static_cast<double>(train_bags.size());

        const double val_loss = evaluate_loss(mcfg, params, val_bags, tcfg.lambda,
                                              tcfg.sequence_length, extractor);
        const double wall =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        out.log.push_back({epoch, epoch_loss, val_loss, lr, wall});
        if (val_loss < out.best_val_loss) {
            out.best_val_loss = val_loss;
            out.best_epoch = epoch;
            out.params = params;
        }
    }
    out.rng_state = shuffle_rng.state();
    return out;
}

// Deterministically carves a validation subset (at least one bag) off the
// training split; the remainder trains.
inline std::pair<std::vector<VideoBag>, std::vector<VideoBag>> carve_validation(
    const std::vector<VideoBag>& bags, double fraction, std::uint64_t seed) {
    require(bags.size() >= 2, "carve_validation: need at least 2 bags");
    std::vector<int> order(bags.size());
    std::iota(order.begin(), order.end(), 0);
    Rng rng(derive_seed(seed, "validation"));
    rng.shuffle(order);
    const int val_size = std::max(1, static_cast<int>(std::lround(fraction * bags.size())));
    std::vector<VideoBag> train, val;
    for (std::size_t i = 0; i < order.size(); ++i)
        (static_cast<int>(i) < val_size ? val : train).push_back(bags[order[i]]);
    require(!train.empty(), "carve_validation: nothing left to train on");
    return {std::move(train), std::move(val)};
}

inline Checkpoint make_checkpoint(const TrainOutcome& outcome, ModelParams& best_params,
                                  const std::string& config_json) {
    Checkpoint ckpt = snapshot_params(best_params);
    ckpt.config_json = config_json;
    ckpt.epoch = static_cast<std::uint64_t>(outcome.best_epoch);
    ckpt.val_loss = outcome.best_val_loss;
    ckpt.rng_state = outcome.rng_state;
    return ckpt;
}

}  // namespace vmil
