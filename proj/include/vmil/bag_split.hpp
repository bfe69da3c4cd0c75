#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "vmil/heads.hpp"
#include "vmil/types.hpp"

namespace vmil {

// Frames split by the attention threshold 1/N: strictly above goes to the
// positive bag, the rest to the negative. Bag embeddings are plain
// (unweighted) sums of member rows, so Z_pos + Z_neg recovers the column sum
// of H.
struct BagSplit {
    std::vector<int> positive_indices;
    std::vector<int> negative_indices;
    Vector z_pos;
    Vector z_neg;

    int b_pos() const { return static_cast<int>(positive_indices.size()); }
    int b_neg() const { return static_cast<int>(negative_indices.size()); }
};

inline BagSplit split_bags(const Matrix& H, const Vector& alpha) {
    const int n = static_cast<int>(H.rows());
    require(alpha.size() == n, "split_bags: length mismatch");
    require((alpha.array() >= 0.0).all() && std::abs(alpha.sum() - 1.0) <= 1e-6,
            "split_bags: alpha not on the simplex");
    const double threshold = 1.0 / n;
    BagSplit s;
    for (int i = 0; i < n; ++i)
        (alpha[i] > threshold ? s.positive_indices : s.negative_indices).push_back(i);
    if (s.positive_indices.empty()) {
        // Exactly-uniform alpha: the strict rule leaves no positive member.
        // Promote the argmax frame (lowest index on ties) so B+ >= 1.
        int best = 0;
        for (int i = 1; i < n; ++i)
            if (alpha[i] > alpha[best]) best = i;
        s.positive_indices.push_back(best);
        s.negative_indices.erase(
            std::find(s.negative_indices.begin(), s.negative_indices.end(), best));
    }
    s.z_pos = Vector::Zero(H.cols());
    s.z_neg = Vector::Zero(H.cols());
    for (int i : s.positive_indices) s.z_pos += H.row(i);
    for (int i : s.negative_indices) s.z_neg += H.row(i);
    return s;
}

struct SelfSupCache {
    BagScoreCache pos, neg;
};

inline constexpr double kProbClip = 1e-7;

inline double clip_prob(double p) { return std::clamp(p, kProbClip, 1.0 - kProbClip); }

// Bernoulli NLL over the two bags: the positive bag is scored against target
// 1 and the negative against target 0, averaged over the two instances.
inline double self_sup_loss(const BagSplit& split, const BagScorerParams& p,
                            SelfSupCache* cache = nullptr) {
    SelfSupCache local;
    SelfSupCache& c = cache ? *cache : local;
    const double s_pos = clip_prob(bag_score(split.z_pos, p, &c.pos));
    const double s_neg = clip_prob(bag_score(split.z_neg, p, &c.neg));
    return -0.5 * (std::log(s_pos) + std::log(1.0 - s_neg));
}

// Accumulates scorer gradients and the dH contribution through the two bag
// sums. The member index sets are a non-differentiable function of alpha, so
// no gradient reaches alpha here.
inline void self_sup_backward(const BagSplit& split, const BagScorerParams& p,
                              const SelfSupCache& cache, double d_loss, BagScorerParams& grad,
                              Matrix& dH) {
    // d/dlogit of -0.5*log(sigma(l)) is -0.5*(1 - s); of -0.5*log(1 - sigma(l)) is 0.5*s.
    // A binding prob clip flattens the loss, so the path carries zero there.
    const bool pos_clipped = cache.pos.prob <= kProbClip || cache.pos.prob >= 1.0 - kProbClip;
    const bool neg_clipped = cache.neg.prob <= kProbClip || cache.neg.prob >= 1.0 - kProbClip;
    const double d_logit_pos = pos_clipped ? 0.0 : d_loss * -0.5 * (1.0 - cache.pos.prob);
    const double d_logit_neg = neg_clipped ? 0.0 : d_loss * 0.5 * cache.neg.prob;
    const Vector dz_pos = bag_score_backward(split.z_pos, p, cache.pos, d_logit_pos, grad);
    const Vector dz_neg = bag_score_backward(split.z_neg, p, cache.neg, d_logit_neg, grad);
    for (int i : split.positive_indices) dH.row(i) += dz_pos.transpose();
    for (int i : split.negative_indices) dH.row(i) += dz_neg.transpose();
}

}  // namespace vmil
