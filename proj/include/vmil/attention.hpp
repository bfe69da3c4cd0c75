#pragma once

#include <cmath>

#include "vmil/rng.hpp"
#include "vmil/types.hpp"

namespace vmil {

// Two-layer attention network: score_n = w^T tanh(V h_n), softmax over the
// sequence. V: L x M, w: L.
struct AttentionParams {
    Matrix V;
    Vector w;

    int hidden() const { return static_cast<int>(V.rows()); }
    int input_dim() const { return static_cast<int>(V.cols()); }
};

inline AttentionParams make_attention(int input_dim, int hidden, Rng& rng) {
    AttentionParams p;
    p.V = Matrix(hidden, input_dim);
    p.w = Vector(hidden);
    const double bv = 1.0 / std::sqrt(static_cast<double>(input_dim));
    const double bw = 1.0 / std::sqrt(static_cast<double>(hidden));
    for (Eigen::Index r = 0; r < p.V.rows(); ++r)
        for (Eigen::Index c = 0; c < p.V.cols(); ++c) p.V(r, c) = rng.uniform(-bv, bv);
    for (Eigen::Index r = 0; r < p.w.size(); ++r) p.w[r] = rng.uniform(-bw, bw);
    return p;
}

inline AttentionParams zeros_like(const AttentionParams& p) {
    return {Matrix::Zero(p.V.rows(), p.V.cols()), Vector::Zero(p.w.size())};
}

// Softmax with max subtraction; shift-invariant by construction.
inline Vector softmax(const Vector& logits) {
    const double m = logits.maxCoeff();
    Vector e = (logits.array() - m).exp().matrix();
    return e / e.sum();
}

struct AttentionCache {
    Matrix tanh_vh;  // L x N, tanh(V h_n) per column
    Vector logits;   // N
    Vector alpha;    // N
};

inline Vector attention_logits(const Matrix& H, const AttentionParams& p, Matrix* tanh_vh = nullptr) {
    Matrix t = (p.V * H.transpose()).array().tanh().matrix();  // L x N
    Vector logits = t.transpose() * p.w;
    if (tanh_vh) *tanh_vh = std::move(t);
    return logits;
}

// alpha_n = exp(w^T tanh(V h_n)) / sum_i exp(w^T tanh(V h_i)).
inline Vector attention_weights(const Matrix& H, const AttentionParams& p,
                                AttentionCache* cache = nullptr) {
    require(H.rows() >= 1, "attention_weights: empty sequence");
    require_finite(H, "attention_weights input");
    require(static_cast<int>(H.cols()) == p.input_dim(), "attention_weights: dim mismatch");
    AttentionCache local;
    AttentionCache& c = cache ? *cache : local;
    c.logits = attention_logits(H, p, &c.tanh_vh);
    c.alpha = softmax(c.logits);
    return c.alpha;
}

// Accumulates dV, dw and adds this block's contribution to dH.
inline void attention_backward(const Matrix& H, const AttentionParams& p,
                               const AttentionCache& cache, const Vector& d_alpha,
                               AttentionParams& grad, Matrix& dH) {
    const Vector& a = cache.alpha;
    const double dot = d_alpha.dot(a);
    const Vector d_logits = a.cwiseProduct(d_alpha.array().matrix() - Vector::Constant(a.size(), dot));
    for (Eigen::Index n = 0; n < H.rows(); ++n) {
        const Vector t = cache.tanh_vh.col(n);
        grad.w += d_logits[n] * t;
        const Vector da = (d_logits[n] * p.w).cwiseProduct((1.0 - t.array().square()).matrix());
        grad.V.noalias() += da * H.row(n);
        dH.row(n) += (p.V.transpose() * da).transpose();
    }
}

// MIL pooling: Z = sum_n alpha_n h_n.
inline Vector pool(const Matrix& H, const Vector& alpha) {
    require(H.rows() == alpha.size(), "pool: length mismatch");
    require((alpha.array() >= 0.0).all() && std::abs(alpha.sum() - 1.0) <= 1e-6,
            "pool: alpha not on the simplex");
    return H.transpose() * alpha;
}

inline void pool_backward(const Matrix& H, const Vector& alpha, const Vector& dZ, Matrix& dH,
                          Vector& d_alpha) {
    dH.noalias() += alpha * dZ.transpose();
    d_alpha += H * dZ;
}

}  // namespace vmil
