#include <gtest/gtest.h>

#include <cmath>

#include "vmil/bag_split.hpp"
#include "vmil/gradcheck.hpp"
#include "vmil/rng.hpp"

using namespace vmil;

namespace {

Matrix random_matrix(int r, int c, Rng& rng) {
    Matrix m(r, c);
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < c; ++j) m(i, j) = rng.normal();
    return m;
}

std::vector<TensorRef> scorer_refs(BagScorerParams& p) {
    std::vector<TensorRef> refs;
    if (p.two_layer()) {
        refs.push_back({"w1", p.w1.data(), p.w1.rows(), p.w1.cols()});
        refs.push_back({"b1", p.b1.data(), p.b1.size(), 1});
    }
    refs.push_back({"w2", p.w2.data(), p.w2.size(), 1});
    refs.push_back({"b2", &p.b2, 1, 1});
    return refs;
}

}  // namespace

TEST(SplitBags, ThresholdRuleOnDescendingAlpha) {
    Matrix h = Matrix::Identity(4, 4);
    Vector alpha(4);
    alpha << 0.4, 0.3, 0.2, 0.1;  // threshold 1/4
    const BagSplit s = split_bags(h, alpha);
    EXPECT_EQ(s.positive_indices, (std::vector<int>{0, 1}));
    EXPECT_EQ(s.negative_indices, (std::vector<int>{2, 3}));
    EXPECT_EQ(s.b_pos() + s.b_neg(), 4);
}

// Exactly uniform alpha defeats the strict rule; the argmax frame (lowest
// index) is promoted so the positive bag is never empty.
TEST(SplitBags, UniformAlphaPromotesFirstFrame) {
    Rng rng(1);
    const Matrix h = random_matrix(5, 3, rng);
    const Vector alpha = Vector::Constant(5, 0.2);
    const BagSplit s = split_bags(h, alpha);
    EXPECT_EQ(s.positive_indices, (std::vector<int>{0}));
    EXPECT_EQ(s.b_neg(), 4);
}

TEST(SplitBags, SingleFrameAllPositive) {
    Rng rng(2);
    const Matrix h = random_matrix(1, 3, rng);
    const BagSplit s = split_bags(h, Vector::Ones(1));
    EXPECT_EQ(s.b_pos(), 1);
    EXPECT_EQ(s.b_neg(), 0);
    EXPECT_LT((s.z_neg).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(SplitBags, OneHotAlphaSelectsFrameVersusRest) {
    Rng rng(3);
    const Matrix h = random_matrix(6, 4, rng);
    Vector alpha = Vector::Zero(6);
    alpha[3] = 1.0;
    const BagSplit s = split_bags(h, alpha);
    EXPECT_EQ(s.positive_indices, (std::vector<int>{3}));
    EXPECT_LT((s.z_pos - h.row(3).transpose()).cwiseAbs().maxCoeff(), 1e-15);
    Vector rest = Vector::Zero(4);
    for (int i = 0; i < 6; ++i)
        if (i != 3) rest += h.row(i);
    EXPECT_LT((s.z_neg - rest).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(SplitBags, PartitionAndSumInvariantsOnRandomDraws) {
    Rng rng(4);
    for (int trial = 0; trial < 1000; ++trial) {
        const int n = 1 + static_cast<int>(rng.uniform_int(0, 19));
        const int m = 1 + static_cast<int>(rng.uniform_int(0, 7));
        const Matrix h = random_matrix(n, m, rng);
        Vector alpha(n);
        for (int i = 0; i < n; ++i) alpha[i] = rng.uniform() + 1e-9;
        alpha /= alpha.sum();
        const BagSplit s = split_bags(h, alpha);
        EXPECT_EQ(s.b_pos() + s.b_neg(), n);
        EXPECT_GE(s.b_pos(), 1);
        std::vector<bool> seen(n, false);
        for (int i : s.positive_indices) seen[i] = true;
        for (int i : s.negative_indices) {
            EXPECT_FALSE(seen[i]);
            seen[i] = true;
        }
        for (bool b : seen) EXPECT_TRUE(b);
        const Vector total = h.colwise().sum().transpose();
        EXPECT_LT((s.z_pos + s.z_neg - total).cwiseAbs().maxCoeff(), 1e-8);
    }
}

TEST(BagScore, ZeroParamsGiveOneHalf) {
    BagScorerParams p;
    p.w1 = Matrix(0, 0);
    p.b1 = Vector(0);
    p.w2 = Vector::Zero(4);
    p.b2 = 0.0;
    EXPECT_EQ(bag_score(Vector::Ones(4), p), 0.5);
}

TEST(BagScore, GradientMatchesFiniteDifferences) {
    Rng rng(5);
    for (int hidden : {0, 4}) {
        BagScorerParams p = make_bag_scorer(5, hidden, rng);
        const Matrix h = random_matrix(6, 5, rng);
        Vector alpha(6);
        for (int i = 0; i < 6; ++i) alpha[i] = rng.uniform() + 0.01;
        alpha /= alpha.sum();
        const BagSplit split = split_bags(h, alpha);

        SelfSupCache cache;
        self_sup_loss(split, p, &cache);
        BagScorerParams grads = zeros_like(p);
        Matrix dh = Matrix::Zero(6, 5);
        self_sup_backward(split, p, cache, 1.0, grads, dh);

        auto loss = [&]() { return self_sup_loss(split, p); };
        const auto report = finite_diff_check(loss, scorer_refs(p), scorer_refs(grads));
        EXPECT_LT(report.max_rel_err, 1e-4) << "hidden=" << hidden;
    }
}

TEST(SelfSupLoss, SymmetricScoresGiveLogTwo) {
    BagScorerParams p;
    p.w1 = Matrix(0, 0);
    p.b1 = Vector(0);
    p.w2 = Vector::Zero(3);
    p.b2 = 0.0;
    BagSplit split;
    split.positive_indices = {0};
    split.negative_indices = {1};
    split.z_pos = Vector::Ones(3);
    split.z_neg = Vector::Ones(3);
    EXPECT_NEAR(self_sup_loss(split, p), std::log(2.0), 1e-12);
}

// The prob clip floors the loss near 1e-7, the perfect-separation limit.
TEST(SelfSupLoss, PerfectSeparationDrivesLossToTheClipFloor) {
    BagScorerParams p;
    p.w1 = Matrix(0, 0);
    p.b1 = Vector(0);
    p.w2 = Vector::Constant(1, 25.0);
    p.b2 = 0.0;
    BagSplit split;
    split.z_pos = Vector::Ones(1);
    split.z_neg = -Vector::Ones(1);
    EXPECT_LT(self_sup_loss(split, p), 1e-6);
}

// -(ln 0.9 + ln 0.8)/2, built by solving the scorer logits for the wanted
// probabilities.
TEST(SelfSupLoss, HandComputedValue) {
    BagScorerParams p;
    p.w1 = Matrix(0, 0);
    p.b1 = Vector(0);
    p.w2 = Vector::Ones(1);
    p.b2 = 0.0;
    BagSplit split;
    split.z_pos = Vector::Constant(1, std::log(0.9 / 0.1));  // sigma -> 0.9
    split.z_neg = Vector::Constant(1, std::log(0.2 / 0.8));  // sigma -> 0.2
    const double expected = -0.5 * (std::log(0.9) + std::log(0.8));
    EXPECT_NEAR(self_sup_loss(split, p), expected, 1e-12);
    EXPECT_NEAR(expected, 0.164252033486018, 1e-12);
}

// One small gradient step on frozen embeddings strictly decreases the loss.
TEST(SelfSupLoss, DescentSmokeTest) {
    Rng rng(6);
    BagScorerParams p = make_bag_scorer(4, 0, rng);
    const Matrix h = random_matrix(8, 4, rng);
    Vector alpha(8);
    for (int i = 0; i < 8; ++i) alpha[i] = rng.uniform() + 0.01;
    alpha /= alpha.sum();
    const BagSplit split = split_bags(h, alpha);

    SelfSupCache cache;
    const double before = self_sup_loss(split, p, &cache);
    BagScorerParams grads = zeros_like(p);
    Matrix dh = Matrix::Zero(8, 4);
    self_sup_backward(split, p, cache, 1.0, grads, dh);
    const double step = 1e-3;
    p.w2 -= step * grads.w2;
    p.b2 -= step * grads.b2;
    EXPECT_LT(self_sup_loss(split, p), before);
}

// On linearly separable bag embeddings a few hundred plain gradient steps
// must push the scorer to confident separation.
TEST(BagScore, ConvergesOnTwoClusterToyEmbeddings) {
    Rng rng(7);
    BagScorerParams p = make_bag_scorer(3, 0, rng);
    std::vector<BagSplit> splits;
    for (int i = 0; i < 10; ++i) {
        BagSplit s;
        s.positive_indices = {0};
        s.negative_indices = {1};
        s.z_pos = Vector::Ones(3) * 2.0;
        s.z_neg = -Vector::Ones(3) * 2.0;
        for (int d = 0; d < 3; ++d) {
            s.z_pos[d] += 0.1 * rng.normal();
            s.z_neg[d] += 0.1 * rng.normal();
        }
        splits.push_back(std::move(s));
    }
    for (int iter = 0; iter < 500; ++iter) {
        BagScorerParams grads = zeros_like(p);
        Matrix dummy = Matrix::Zero(2, 3);
        for (const auto& s : splits) {
            SelfSupCache cache;
            self_sup_loss(s, p, &cache);
            self_sup_backward(s, p, cache, 1.0, grads, dummy);
        }
        p.w2 -= 0.5 * grads.w2;
        p.b2 -= 0.5 * grads.b2;
    }
    for (const auto& s : splits) {
        EXPECT_GE(bag_score(s.z_pos, p), 0.9);
        EXPECT_LE(bag_score(s.z_neg, p), 0.1);
    }
}
