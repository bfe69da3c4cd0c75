#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "vmil/gradcheck.hpp"
#include "vmil/model.hpp"
#include "vmil/rng.hpp"

using namespace vmil;

namespace {

Matrix random_matrix(int r, int c, Rng& rng) {
    Matrix m(r, c);
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < c; ++j) m(i, j) = rng.normal();
    return m;
}

ModelConfig toy_config(Variant v) {
    ModelConfig cfg;
    cfg.variant = v;
    cfg.feature_dim = 8;
    cfg.hidden_dim = 4;
    cfg.num_layers = 2;
    cfg.attention_hidden = 5;
    cfg.num_classes = 3;
    return cfg;
}

}  // namespace

TEST(VideoLoss, UninformativePredictionGivesLogTwo) {
    const Vector pred = Vector::Constant(4, 0.5);
    EXPECT_NEAR(video_loss(pred, LabelSet(4, {1, 3})), std::log(2.0), 1e-12);
    EXPECT_NEAR(video_loss(pred, LabelSet(4)), std::log(2.0), 1e-12);
}

TEST(VideoLoss, PerfectPredictionIsNearZero) {
    const int k = 5;
    const LabelSet gt(k, {0, 2});
    Vector pred(k);
    for (int c = 0; c < k; ++c) pred[c] = gt.contains(c) ? 1.0 - 1e-12 : 1e-12;
    EXPECT_LE(video_loss(pred, gt), 2e-7 * k);
}

TEST(VideoLoss, HandComputedTwoClassValue) {
    Vector pred(2);
    pred << 0.9, 0.2;
    const double expected = -(std::log(0.9) + std::log(0.8)) / 2.0;
    EXPECT_NEAR(video_loss(pred, LabelSet(2, {0})), expected, 1e-12);
    EXPECT_NEAR(expected, 0.164252033486018, 1e-12);
}

TEST(VideoLoss, RejectsOutOfRangePredictions) {
    Vector pred(2);
    pred << 0.5, 1.0;
    EXPECT_THROW(video_loss(pred, LabelSet(2)), ContractViolation);
}

TEST(TotalLoss, LambdaZeroEqualsVideoLossBitExactly) {
    Rng rng(1);
    Vector pred(3);
    pred << 0.2, 0.7, 0.55;
    const LabelSet gt(3, {1});
    BagSplit split;
    split.positive_indices = {0};
    split.negative_indices = {1};
    split.z_pos = random_matrix(4, 1, rng);
    split.z_neg = random_matrix(4, 1, rng);
    BagScorerParams scorer = make_bag_scorer(4, 0, rng);
    EXPECT_EQ(total_loss(pred, gt, &split, &scorer, 0.0), video_loss(pred, gt));
}

TEST(TotalLoss, UnitLambdaAddsTheBernoulliTerm) {
    Vector pred = Vector::Constant(2, 0.5);
    const LabelSet gt(2, {0});
    BagScorerParams scorer;
    scorer.w1 = Matrix(0, 0);
    scorer.b1 = Vector(0);
    scorer.w2 = Vector::Zero(3);
    scorer.b2 = 0.0;
    BagSplit split;
    split.positive_indices = {0};
    split.negative_indices = {1};
    split.z_pos = Vector::Ones(3);
    split.z_neg = Vector::Ones(3);
    EXPECT_NEAR(total_loss(pred, gt, &split, &scorer, 1.0), 2.0 * std::log(2.0), 1e-12);
}

TEST(Variants, ExactlyFiveNamedWirings) {
    EXPECT_EQ(variant_names().size(), 5u);
    for (const auto& [v, name] : variant_names()) {
        EXPECT_EQ(variant_from_wiring(wiring_for(v)), v);
        EXPECT_EQ(variant_from_string(name), v);
    }
    EXPECT_THROW(variant_from_string("ResNetOnly"), ConfigError);
}

TEST(Variants, NonCanonicalWiringRejected) {
    using S = VariantWiring::Source;
    // Residual block without self-supervision is not one of the five.
    VariantWiring w{S::LstmHidden, S::LstmHidden, true, false, false};
    EXPECT_THROW(variant_from_wiring(w), ContractViolation);
    // Final-state classifier on LSTM attention is not constructible either.
    VariantWiring w2{S::LstmHidden, S::LstmHidden, false, false, true};
    EXPECT_THROW(variant_from_wiring(w2), ContractViolation);
}

// Zeroing the residual projection turns PS-DeVCEM's forward path into
// AttenLSTM over the same recurrence weights.
TEST(Variants, PsDevcemWithZeroProjectionMatchesAttenLstm) {
    const ModelConfig ps_cfg = toy_config(Variant::PSDeVCEM);
    const ModelConfig atten_cfg = toy_config(Variant::AttenLSTM);
    ModelParams ps = init_model(ps_cfg, 21);
    const ModelParams atten = init_model(atten_cfg, 21);
    ps.proj.setZero();

    Rng rng(22);
    const Matrix x = random_matrix(6, 8, rng);
    const ForwardResult a = forward_variant(ps_cfg, ps, x);
    const ForwardResult b = forward_variant(atten_cfg, atten, x);
    EXPECT_LT((a.probs - b.probs).cwiseAbs().maxCoeff(), 1e-8);
    EXPECT_LT((a.alpha - b.alpha).cwiseAbs().maxCoeff(), 1e-8);
}

// With w = 0 the attention is uniform, so AttenConv must equal classifying
// the final state of the (1/N)-scaled sequence.
TEST(Variants, AttenConvUniformAttentionScalesByOneOverN) {
    const ModelConfig cfg = toy_config(Variant::AttenConv);
    ModelParams params = init_model(cfg, 31);
    params.attn.w.setZero();
    Rng rng(32);
    const int n = 5;
    const Matrix x = random_matrix(n, 8, rng);

    const ForwardResult fwd = forward_variant(cfg, params, x);
    const Matrix h = bilstm_forward(x / static_cast<double>(n), params.lstm, nullptr);
    const Vector expected = classify(bilstm_final_state(h, cfg.hidden_dim), params.cls);
    EXPECT_LT((fwd.probs - expected).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Variants, SingleFrameAttentionIsOne) {
    Rng rng(41);
    for (const auto& [v, name] : variant_names()) {
        const ModelConfig cfg = toy_config(v);
        const ModelParams params = init_model(cfg, 42);
        const Matrix x = random_matrix(1, 8, rng);
        const ForwardResult fwd = forward_variant(cfg, params, x);
        ASSERT_EQ(fwd.alpha.size(), 1) << name;
        EXPECT_EQ(fwd.alpha[0], 1.0) << name;
        if (v != Variant::AttenConv)
            EXPECT_LT((fwd.z - fwd.H.row(0).transpose()).cwiseAbs().maxCoeff(), 1e-12) << name;
    }
}

// GuidedLSTM at lambda = 0 must produce exactly the AttenLSTM gradients on
// every shared tensor, and exactly zero on the bag scorer.
TEST(Variants, LambdaZeroGradientsEqualVideoOnlyGradients) {
    const ModelConfig guided_cfg = toy_config(Variant::GuidedLSTM);
    const ModelConfig atten_cfg = toy_config(Variant::AttenLSTM);
    ModelParams guided = init_model(guided_cfg, 51);
    ModelParams atten = init_model(atten_cfg, 51);

    Rng rng(52);
    const Matrix x = random_matrix(6, 8, rng);
    const LabelSet gt(3, {0, 2});

    ModelCache gc, ac;
    const ForwardResult gf = forward_variant(guided_cfg, guided, x, &gc);
    const ForwardResult af = forward_variant(atten_cfg, atten, x, &ac);
    ModelParams g_grads = zeros_like(guided);
    ModelParams a_grads = zeros_like(atten);
    backward_variant(guided_cfg, guided, x, gc, gf, gt, 0.0, g_grads);
    backward_variant(atten_cfg, atten, x, ac, af, gt, 0.0, a_grads);

    auto g_refs = tensor_refs(g_grads);
    auto a_refs = tensor_refs(a_grads);
    for (const auto& gr : g_refs) {
        if (gr.name.rfind("bag.", 0) == 0) {
            for (Eigen::Index i = 0; i < gr.size(); ++i) EXPECT_EQ(gr.data[i], 0.0) << gr.name;
            continue;
        }
        const auto it = std::find_if(a_refs.begin(), a_refs.end(),
                                     [&](const TensorRef& r) { return r.name == gr.name; });
        ASSERT_NE(it, a_refs.end()) << gr.name;
        for (Eigen::Index i = 0; i < gr.size(); ++i)
            EXPECT_EQ(gr.data[i], it->data[i]) << gr.name << "[" << i << "]";
    }
}

// Full composite gradient at toy dims for the flagship variant, against
// central differences, including the self-supervision branch.
TEST(Variants, PsDevcemTotalLossGradientMatchesFiniteDifferences) {
    const ModelConfig cfg = toy_config(Variant::PSDeVCEM);
    ModelParams params = init_model(cfg, 11);
    Rng rng(17);
    const Matrix x = random_matrix(6, 8, rng);
    const LabelSet gt(3, {0, 2});
    const double lambda = 1.0;

    ModelCache cache;
    const ForwardResult fwd = forward_variant(cfg, params, x, &cache);
    variant_loss(cfg, fwd, gt, params, lambda, &cache.selfsup);
    ModelParams grads = zeros_like(params);
    backward_variant(cfg, params, x, cache, fwd, gt, lambda, grads);

    auto loss = [&]() {
        const ForwardResult f = forward_variant(cfg, params, x);
        return variant_loss(cfg, f, gt, params, lambda);
    };
    const auto report = finite_diff_check(loss, tensor_refs(params), tensor_refs(grads));
    EXPECT_LT(report.max_rel_err, 1e-4);
}
