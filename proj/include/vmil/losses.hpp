#pragma once

#include <cmath>

#include "vmil/bag_split.hpp"
#include "vmil/label_set.hpp"
#include "vmil/types.hpp"

namespace vmil {

// Multi-label video loss: mean over classes of binary cross-entropy against
// the multi-hot ground truth, with probabilities clipped like the
// self-supervision term.
inline double video_loss(const Vector& pred, const LabelSet& gt) {
    require(pred.size() == gt.num_classes(), "video_loss: class-count mismatch");
    require((pred.array() > 0.0).all() && (pred.array() < 1.0).all(),
            "video_loss: predictions must lie in (0,1)");
    const Vector g = gt.multi_hot();
    double total = 0.0;
    for (Eigen::Index k = 0; k < pred.size(); ++k) {
        const double y = clip_prob(pred[k]);
        total += -(g[k] * std::log(y) + (1.0 - g[k]) * std::log(1.0 - y));
    }
    return total / static_cast<double>(pred.size());
}

// dL/dlogit for the sigmoid + mean-BCE composition: (probs - g)/K. Entries
// where the prob clip binds are flattened to zero.
inline Vector video_loss_dlogits(const Vector& probs, const LabelSet& gt) {
    const Vector g = gt.multi_hot();
    Vector d = (probs - g) / static_cast<double>(probs.size());
    for (Eigen::Index k = 0; k < probs.size(); ++k)
        if (probs[k] <= kProbClip || probs[k] >= 1.0 - kProbClip) d[k] = 0.0;
    return d;
}

// Composite objective: video prediction loss plus lambda-weighted
// self-supervision. lambda = 0 bypasses the second term entirely so the
// value and its gradients equal video_loss bit for bit.
inline double total_loss(const Vector& pred, const LabelSet& gt, const BagSplit* split,
                         const BagScorerParams* scorer, double lambda,
                         SelfSupCache* cache = nullptr) {
    double loss = video_loss(pred, gt);
    if (lambda != 0.0) {
        require(split != nullptr && scorer != nullptr,
                "total_loss: lambda != 0 requires a bag split and scorer");
        loss += lambda * self_sup_loss(*split, *scorer, cache);
    }
    return loss;
}

}  // namespace vmil
