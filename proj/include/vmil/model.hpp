#pragma once

#include <optional>
#include <string>
#include <vector>

#include "vmil/attention.hpp"
#include "vmil/bag_split.hpp"
#include "vmil/heads.hpp"
#include "vmil/losses.hpp"
#include "vmil/lstm.hpp"
#include "vmil/types.hpp"

namespace vmil {

enum class Variant { AttenConv, AttenConvLSTM, AttenLSTM, GuidedLSTM, PSDeVCEM };

inline const std::vector<std::pair<Variant, std::string>>& variant_names() {
    static const std::vector<std::pair<Variant, std::string>> names = {
        {Variant::AttenConv, "AttenConv"},
        {Variant::AttenConvLSTM, "AttenConvLSTM"},
        {Variant::AttenLSTM, "AttenLSTM"},
        {Variant::GuidedLSTM, "GuidedLSTM"},
        {Variant::PSDeVCEM, "PS-DeVCEM"},
    };
    return names;
}

inline std::string to_string(Variant v) {
    for (const auto& [var, name] : variant_names())
        if (var == v) return name;
    throw ContractViolation("unknown variant");
}

inline Variant variant_from_string(const std::string& s) {
    for (const auto& [var, name] : variant_names())
        if (name == s) return var;
    throw ConfigError("unknown variant '" + s + "'; expected one of AttenConv, AttenConvLSTM, "
                      "AttenLSTM, GuidedLSTM, PS-DeVCEM");
}

// The wiring tuple behind each named variant. Only the five canonical
// combinations are constructible.
struct VariantWiring {
    enum class Source { ConvFeatures, LstmHidden };
    Source attention_input;
    Source aggregation_target;
    bool use_residual_block;
    bool use_self_supervision;
    bool use_final_state_classifier;

    bool operator==(const VariantWiring&) const = default;
};

inline VariantWiring wiring_for(Variant v) {
    using S = VariantWiring::Source;
    switch (v) {
        case Variant::AttenConv:
            return {S::ConvFeatures, S::ConvFeatures, false, false, true};
        case Variant::AttenConvLSTM:
            return {S::ConvFeatures, S::LstmHidden, false, false, false};
        case Variant::AttenLSTM:
            return {S::LstmHidden, S::LstmHidden, false, false, false};
        case Variant::GuidedLSTM:
            return {S::LstmHidden, S::LstmHidden, false, true, false};
        case Variant::PSDeVCEM:
            return {S::LstmHidden, S::LstmHidden, true, true, false};
    }
    throw ContractViolation("unknown variant");
}

inline Variant variant_from_wiring(const VariantWiring& w) {
    for (const auto& [var, name] : variant_names())
        if (wiring_for(var) == w) return var;
    throw ContractViolation("wiring does not match any of the five constructible variants");
}

struct ModelConfig {
    Variant variant = Variant::PSDeVCEM;
    int feature_dim = 2048;
    int hidden_dim = 512;       // per direction; embeddings are 2x this
    int num_layers = 2;
    int attention_hidden = 256;
    int num_classes = 14;
    int bag_scorer_hidden = 0;  // 0 = single linear scorer

    int embedding_dim() const { return 2 * hidden_dim; }
    int attention_input_dim() const {
        return wiring_for(variant).attention_input == VariantWiring::Source::ConvFeatures
                   ? feature_dim
                   : embedding_dim();
    }

    void validate() const {
        if (feature_dim < 1 || hidden_dim < 1 || num_layers < 1 || attention_hidden < 1 ||
            num_classes < 1 || bag_scorer_hidden < 0)
            throw ConfigError("model config: dimensions must be positive");
    }
};

struct ModelParams {
    BiLstmParams lstm;
    Matrix proj;  // 0x0 unless the residual block is wired
    AttentionParams attn;
    ClassifierParams cls;
    BagScorerParams bag;  // empty unless self-supervision is wired

    bool has_proj() const { return proj.size() > 0; }
    bool has_bag() const { return bag.w2.size() > 0; }
};

inline ModelParams init_model(const ModelConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    const auto wiring = wiring_for(cfg.variant);
    ModelParams p;
    {
        Rng rng(derive_seed(seed, "lstm"));
        p.lstm = make_bilstm(cfg.feature_dim, cfg.hidden_dim, cfg.num_layers, rng);
    }
    if (wiring.use_residual_block) {
        Rng rng(derive_seed(seed, "proj"));
        p.proj = Matrix(cfg.embedding_dim(), cfg.feature_dim);
        const double b = 1.0 / std::sqrt(static_cast<double>(cfg.feature_dim));
        for (Eigen::Index r = 0; r < p.proj.rows(); ++r)
            for (Eigen::Index c = 0; c < p.proj.cols(); ++c) p.proj(r, c) = rng.uniform(-b, b);
    }
    {
        Rng rng(derive_seed(seed, "attention"));
        p.attn = make_attention(cfg.attention_input_dim(), cfg.attention_hidden, rng);
    }
    {
        Rng rng(derive_seed(seed, "classifier"));
        p.cls = make_classifier(cfg.embedding_dim(), cfg.num_classes, rng);
    }
    if (wiring.use_self_supervision) {
        Rng rng(derive_seed(seed, "bag_scorer"));
        p.bag = make_bag_scorer(cfg.embedding_dim(), cfg.bag_scorer_hidden, rng);
    }
    return p;
}

inline ModelParams zeros_like(const ModelParams& p) {
    ModelParams z;
    z.lstm = zeros_like(p.lstm);
    z.proj = Matrix::Zero(p.proj.rows(), p.proj.cols());
    z.attn = zeros_like(p.attn);
    z.cls = zeros_like(p.cls);
    z.bag = zeros_like(p.bag);
    return z;
}

inline std::vector<TensorRef> tensor_refs(ModelParams& p) {
    std::vector<TensorRef> refs = tensor_refs(p.lstm);
    auto add_m = [&](const std::string& name, Matrix& m) {
        if (m.size() > 0) refs.push_back({name, m.data(), m.rows(), m.cols()});
    };
    auto add_v = [&](const std::string& name, Vector& v) {
        if (v.size() > 0) refs.push_back({name, v.data(), v.size(), 1});
    };
    add_m("proj", p.proj);
    add_m("attn.V", p.attn.V);
    add_v("attn.w", p.attn.w);
    add_m("cls.weight", p.cls.weight);
    add_v("cls.bias", p.cls.bias);
    if (p.has_bag()) {
        add_m("bag.w1", p.bag.w1);
        add_v("bag.b1", p.bag.b1);
        add_v("bag.w2", p.bag.w2);
        refs.push_back({"bag.b2", &p.bag.b2, 1, 1});
    }
    return refs;
}

struct ModelCache {
    BiLstmCache lstm;
    Matrix residual_input;  // PS-DeVCEM only
    Matrix scaled_input;    // AttenConv only
    AttentionCache attn;
    ClassifierCache cls;
    SelfSupCache selfsup;
};

struct ForwardResult {
    Vector probs;   // K
    Vector alpha;   // N
    Matrix H;       // N x M embeddings (post-residual where wired)
    Vector z;       // pooled embedding or final state fed to the classifier
    std::optional<BagSplit> split;
};

inline ForwardResult forward_variant(const ModelConfig& cfg, const ModelParams& params,
                                     const Matrix& X, ModelCache* cache = nullptr) {
    require(X.rows() >= 1, "forward_variant: empty sequence");
    require(static_cast<int>(X.cols()) == cfg.feature_dim, "forward_variant: feature dim mismatch");
    require_finite(X, "forward_variant input");
    ModelCache local;
    ModelCache& c = cache ? *cache : local;
    const auto wiring = wiring_for(cfg.variant);
    using S = VariantWiring::Source;

    ForwardResult out;
    if (wiring.attention_input == S::ConvFeatures)
        out.alpha = attention_weights(X, params.attn, &c.attn);

    if (cfg.variant == Variant::AttenConv) {
        c.scaled_input = out.alpha.asDiagonal() * X;
        out.H = bilstm_forward(c.scaled_input, params.lstm, &c.lstm);
        out.z = bilstm_final_state(out.H, cfg.hidden_dim);
    } else {
        if (wiring.use_residual_block) {
            c.residual_input = X;
            out.H = bilstm_forward(X, params.lstm, &c.lstm);
            out.H.noalias() += X * params.proj.transpose();
        } else {
            out.H = bilstm_forward(X, params.lstm, &c.lstm);
        }
        if (wiring.attention_input == S::LstmHidden)
            out.alpha = attention_weights(out.H, params.attn, &c.attn);
        out.z = pool(out.H, out.alpha);
    }
    out.probs = classify(out.z, params.cls, &c.cls);
    if (wiring.use_self_supervision) out.split = split_bags(out.H, out.alpha);
    return out;
}

// Loss of one video under the composite objective. lambda is ignored by
// wirings without self-supervision.
inline double variant_loss(const ModelConfig& cfg, const ForwardResult& fwd, const LabelSet& gt,
                           const ModelParams& params, double lambda, SelfSupCache* cache = nullptr) {
    const bool selfsup = wiring_for(cfg.variant).use_self_supervision;
    if (!selfsup || lambda == 0.0) return video_loss(fwd.probs, gt);
    return total_loss(fwd.probs, gt, &*fwd.split, &params.bag, lambda, cache);
}

// Full reverse pass for the composite loss. Accumulates into `grads`
// (shaped like the params) and optionally returns dL/dX for an unfrozen
// feature extractor.
inline void backward_variant(const ModelConfig& cfg, const ModelParams& params, const Matrix& X,
                             const ModelCache& c, const ForwardResult& fwd, const LabelSet& gt,
                             double lambda, ModelParams& grads, Matrix* dX_out = nullptr) {
    const auto wiring = wiring_for(cfg.variant);
    using S = VariantWiring::Source;
    const Eigen::Index n = X.rows();

    const Vector d_logits = video_loss_dlogits(fwd.probs, gt);
    const Vector dz = classifier_backward(fwd.z, params.cls, c.cls, d_logits, grads.cls);

    Matrix dX = Matrix::Zero(X.rows(), X.cols());
    if (cfg.variant == Variant::AttenConv) {
        const Matrix dH = bilstm_final_state_grad(n, cfg.hidden_dim, dz);
        Matrix d_scaled = bilstm_backward(params.lstm, c.lstm, dH, grads.lstm);
        Vector d_alpha(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            d_alpha[i] = d_scaled.row(i).dot(X.row(i));
            dX.row(i) += fwd.alpha[i] * d_scaled.row(i);
        }
        attention_backward(X, params.attn, c.attn, d_alpha, grads.attn, dX);
    } else {
        Matrix dH = Matrix::Zero(fwd.H.rows(), fwd.H.cols());
        Vector d_alpha = Vector::Zero(n);
        pool_backward(fwd.H, fwd.alpha, dz, dH, d_alpha);
        if (wiring.use_self_supervision && lambda != 0.0)
            self_sup_backward(*fwd.split, params.bag, c.selfsup, lambda, grads.bag, dH);
        if (wiring.attention_input == S::LstmHidden)
            attention_backward(fwd.H, params.attn, c.attn, d_alpha, grads.attn, dH);
        else
            attention_backward(X, params.attn, c.attn, d_alpha, grads.attn, dX);
        if (wiring.use_residual_block) {
            grads.proj.noalias() += dH.transpose() * c.residual_input;
            dX.noalias() += dH * params.proj;
        }
        dX += bilstm_backward(params.lstm, c.lstm, dH, grads.lstm);
    }
    if (dX_out) *dX_out = std::move(dX);
}

}  // namespace vmil
