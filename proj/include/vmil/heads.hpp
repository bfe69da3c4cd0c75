#pragma once

#include <algorithm>
#include <cmath>

#include "vmil/rng.hpp"
#include "vmil/types.hpp"

namespace vmil {

// Logits are clipped to +-30 before the sigmoid, keeping probabilities
// inside (1e-14, 1-1e-14); the clip passes zero gradient when active.
inline constexpr double kLogitClip = 30.0;

inline Vector clipped_sigmoid(const Vector& logits, Eigen::Array<bool, Eigen::Dynamic, 1>* active = nullptr) {
    Vector clipped = logits.cwiseMax(-kLogitClip).cwiseMin(kLogitClip);
    if (active) *active = (logits.array().abs() < kLogitClip);
    return (1.0 / (1.0 + (-clipped.array()).exp())).matrix();
}

// Video-level multi-label head: linear map M -> K plus per-class sigmoid.
struct ClassifierParams {
    Matrix weight;  // K x M
    Vector bias;    // K
};

inline ClassifierParams make_classifier(int input_dim, int num_classes, Rng& rng) {
    ClassifierParams p;
    p.weight = Matrix(num_classes, input_dim);
    p.bias = Vector::Zero(num_classes);
    const double b = 1.0 / std::sqrt(static_cast<double>(input_dim));
    for (Eigen::Index r = 0; r < p.weight.rows(); ++r)
        for (Eigen::Index c = 0; c < p.weight.cols(); ++c) p.weight(r, c) = rng.uniform(-b, b);
    return p;
}

inline ClassifierParams zeros_like(const ClassifierParams& p) {
    return {Matrix::Zero(p.weight.rows(), p.weight.cols()), Vector::Zero(p.bias.size())};
}

struct ClassifierCache {
    Vector logits;  // pre-clip
    Vector probs;
};

inline Vector classify(const Vector& z, const ClassifierParams& p, ClassifierCache* cache = nullptr) {
    require_finite(z, "classify input");
    ClassifierCache local;
    ClassifierCache& c = cache ? *cache : local;
    c.logits = p.weight * z + p.bias;
    c.probs = clipped_sigmoid(c.logits);
    return c.probs;
}

// d_logits already folded with the sigmoid derivative by the caller (the BCE
// path uses probs - targets directly); the clip zeroes saturated entries.
inline Vector classifier_backward(const Vector& z, const ClassifierParams& p,
                                  const ClassifierCache& cache, const Vector& d_logits,
                                  ClassifierParams& grad) {
    Vector dl = d_logits;
    for (Eigen::Index k = 0; k < dl.size(); ++k)
        if (std::abs(cache.logits[k]) >= kLogitClip) dl[k] = 0.0;
    grad.weight.noalias() += dl * z.transpose();
    grad.bias += dl;
    return p.weight.transpose() * dl;
}

// Self-supervision bag scorer. Default is the single linear map M -> 1 with
// sigmoid; hidden > 0 selects the two-layer prose variant M -> hidden -> 1
// with tanh in between.
struct BagScorerParams {
    Matrix w1;  // hidden x M, empty when linear
    Vector b1;  // hidden
    Vector w2;  // M (linear) or hidden
    double b2 = 0.0;

    bool two_layer() const { return w1.rows() > 0; }
};

inline BagScorerParams make_bag_scorer(int input_dim, int hidden, Rng& rng) {
    BagScorerParams p;
    if (hidden > 0) {
        p.w1 = Matrix(hidden, input_dim);
        p.b1 = Vector::Zero(hidden);
        const double b = 1.0 / std::sqrt(static_cast<double>(input_dim));
        for (Eigen::Index r = 0; r < p.w1.rows(); ++r)
            for (Eigen::Index c = 0; c < p.w1.cols(); ++c) p.w1(r, c) = rng.uniform(-b, b);
        p.w2 = Vector(hidden);
        const double b2 = 1.0 / std::sqrt(static_cast<double>(hidden));
        for (Eigen::Index r = 0; r < hidden; ++r) p.w2[r] = rng.uniform(-b2, b2);
    } else {
        p.w1 = Matrix(0, 0);
        p.b1 = Vector(0);
        p.w2 = Vector(input_dim);
        const double b = 1.0 / std::sqrt(static_cast<double>(input_dim));
        for (Eigen::Index r = 0; r < p.w2.size(); ++r) p.w2[r] = rng.uniform(-b, b);
    }
    return p;
}

inline BagScorerParams zeros_like(const BagScorerParams& p) {
    BagScorerParams z;
    z.w1 = Matrix::Zero(p.w1.rows(), p.w1.cols());
    z.b1 = Vector::Zero(p.b1.size());
    z.w2 = Vector::Zero(p.w2.size());
    z.b2 = 0.0;
    return z;
}

struct BagScoreCache {
    Vector hidden_pre;   // two-layer only
    Vector hidden_tanh;  // two-layer only
    double logit = 0.0;  // pre-clip
    double prob = 0.5;
};

inline double bag_score(const Vector& z, const BagScorerParams& p, BagScoreCache* cache = nullptr) {
    require_finite(z, "bag_score input");
    BagScoreCache local;
    BagScoreCache& c = cache ? *cache : local;
    if (p.two_layer()) {
        c.hidden_pre = p.w1 * z + p.b1;
        c.hidden_tanh = c.hidden_pre.array().tanh().matrix();
        c.logit = p.w2.dot(c.hidden_tanh) + p.b2;
    } else {
        c.logit = p.w2.dot(z) + p.b2;
    }
    const double clipped = std::clamp(c.logit, -kLogitClip, kLogitClip);
    c.prob = 1.0 / (1.0 + std::exp(-clipped));
    return c.prob;
}

// d_logit is dL/d(pre-sigmoid logit); returns dL/dZ.
inline Vector bag_score_backward(const Vector& z, const BagScorerParams& p,
                                 const BagScoreCache& cache, double d_logit,
                                 BagScorerParams& grad) {
    if (std::abs(cache.logit) >= kLogitClip) d_logit = 0.0;
    if (p.two_layer()) {
        grad.w2 += d_logit * cache.hidden_tanh;
        grad.b2 += d_logit;
        const Vector dh =
            (d_logit * p.w2).cwiseProduct((1.0 - cache.hidden_tanh.array().square()).matrix());
        grad.w1.noalias() += dh * z.transpose();
        grad.b1 += dh;
        return p.w1.transpose() * dh;
    }
    grad.w2 += d_logit * z;
    grad.b2 += d_logit;
    return d_logit * p.w2;
}

}  // namespace vmil
