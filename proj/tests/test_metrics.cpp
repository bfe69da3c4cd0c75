#include <gtest/gtest.h>

#include <cmath>

#include "vmil/metrics.hpp"
#include "vmil/rng.hpp"

using namespace vmil;

namespace {

PredictionRecord record_from_sets(int k, const std::vector<int>& predicted,
                                  const std::vector<int>& truth) {
    Vector probs = Vector::Constant(k, 0.1);
    for (int c : predicted) probs[c] = 0.9;
    return make_record("r", probs, 0.5, Vector::Constant(1, 1.0), LabelSet(k, truth));
}

}  // namespace

TEST(MakeRecord, PredictionMatchesThresholdStrictly) {
    Vector probs(3);
    probs << 0.5, 0.51, 0.2;
    const auto r = make_record("v", probs, 0.5, Vector::Constant(2, 0.5), LabelSet(3, {0}));
    EXPECT_EQ(r.predicted, LabelSet(3, {1}));  // 0.5 is not > 0.5
}

// Single class with counts TP=2 FP=1 FN=1 TN=6.
TEST(Evaluate, DefinitionalArithmetic) {
    std::vector<PredictionRecord> records;
    for (int i = 0; i < 2; ++i) records.push_back(record_from_sets(1, {0}, {0}));  // TP
    records.push_back(record_from_sets(1, {0}, {}));                               // FP
    records.push_back(record_from_sets(1, {}, {0}));                               // FN
    for (int i = 0; i < 6; ++i) records.push_back(record_from_sets(1, {}, {}));    // TN

    const MetricsTable t = evaluate(records);
    const ClassMetrics& m = t.per_class[0];
    EXPECT_EQ(m.tp, 2);
    EXPECT_EQ(m.fp, 1);
    EXPECT_EQ(m.fn, 1);
    EXPECT_EQ(m.tn, 6);
    EXPECT_NEAR(m.precision, 2.0 / 3.0, 1e-12);
    EXPECT_NEAR(m.recall, 2.0 / 3.0, 1e-12);
    EXPECT_NEAR(m.specificity, 6.0 / 7.0, 1e-12);
    EXPECT_NEAR(m.accuracy, 0.8, 1e-12);
    EXPECT_NEAR(m.f1, 2.0 / 3.0, 1e-12);
}

TEST(Evaluate, AllCorrectGivesOnes) {
    std::vector<PredictionRecord> records;
    records.push_back(record_from_sets(3, {0, 2}, {0, 2}));
    records.push_back(record_from_sets(3, {1}, {1}));
    records.push_back(record_from_sets(3, {2}, {2}));
    const MetricsTable t = evaluate(records);
    for (const auto& m : t.per_class) {
        EXPECT_DOUBLE_EQ(m.accuracy, 1.0);
        EXPECT_DOUBLE_EQ(m.precision, 1.0);
        EXPECT_DOUBLE_EQ(m.recall, 1.0);
        EXPECT_DOUBLE_EQ(m.f1, 1.0);
        EXPECT_DOUBLE_EQ(m.specificity, 1.0);
    }
    EXPECT_DOUBLE_EQ(t.macro_all.f1, 1.0);
}

TEST(Evaluate, AbsentClassReportsZeroRows) {
    std::vector<PredictionRecord> records;
    records.push_back(record_from_sets(2, {0}, {0}));
    records.push_back(record_from_sets(2, {}, {0}));
    const MetricsTable t = evaluate(records);
    const ClassMetrics& m = t.per_class[1];  // never true, never predicted
    EXPECT_DOUBLE_EQ(m.precision, 0.0);
    EXPECT_DOUBLE_EQ(m.recall, 0.0);
    EXPECT_DOUBLE_EQ(m.f1, 0.0);
    EXPECT_DOUBLE_EQ(m.specificity, 1.0);
    // macro over supported classes ignores class 1
    EXPECT_NEAR(t.macro_with_support.recall, 0.5, 1e-12);
}

// Exact agreement with an index-loop counting oracle on 200 random records.
TEST(Evaluate, MatchesNaiveCountingOracle) {
    Rng rng(13);
    const int k = 5;
    std::vector<PredictionRecord> records;
    for (int i = 0; i < 200; ++i) {
        std::vector<int> pred, truth;
        for (int c = 0; c < k; ++c) {
            if (rng.uniform() < 0.3) pred.push_back(c);
            if (rng.uniform() < 0.3) truth.push_back(c);
        }
        records.push_back(record_from_sets(k, pred, truth));
    }

    const MetricsTable t = evaluate(records);
    for (int c = 0; c < k; ++c) {
        long tp = 0, fp = 0, fn = 0, tn = 0;
        for (const auto& r : records) {
            const bool truth = r.ground_truth.contains(c);
            const bool pred = r.predicted.contains(c);
            tp += truth && pred;
            fp += !truth && pred;
            fn += truth && !pred;
            tn += !truth && !pred;
        }
        const ClassMetrics& m = t.per_class[c];
        EXPECT_EQ(m.tp, tp);
        EXPECT_EQ(m.fp, fp);
        EXPECT_EQ(m.fn, fn);
        EXPECT_EQ(m.tn, tn);
        EXPECT_EQ(m.precision, tp + fp > 0 ? double(tp) / double(tp + fp) : 0.0);
        EXPECT_EQ(m.recall, tp + fn > 0 ? double(tp) / double(tp + fn) : 0.0);
        EXPECT_EQ(m.specificity, tn + fp > 0 ? double(tn) / double(tn + fp) : 0.0);
        EXPECT_EQ(m.accuracy, double(tp + tn) / 200.0);
    }
}

TEST(Evaluate, MacroF1LiesBetweenClassExtremes) {
    Rng rng(14);
    std::vector<PredictionRecord> records;
    for (int i = 0; i < 50; ++i) {
        std::vector<int> pred, truth;
        for (int c = 0; c < 4; ++c) {
            if (rng.uniform() < 0.4) pred.push_back(c);
            if (rng.uniform() < 0.4) truth.push_back(c);
        }
        records.push_back(record_from_sets(4, pred, truth));
    }
    const MetricsTable t = evaluate(records);
    double lo = 1.0, hi = 0.0;
    for (const auto& m : t.per_class) {
        lo = std::min(lo, m.f1);
        hi = std::max(hi, m.f1);
    }
    EXPECT_GE(t.macro_all.f1, lo - 1e-12);
    EXPECT_LE(t.macro_all.f1, hi + 1e-12);
}

TEST(ConfusionMatrix, PerfectSingleLabelIsDiagonal) {
    std::vector<PredictionRecord> records;
    for (int c = 0; c < 3; ++c) records.push_back(record_from_sets(3, {c}, {c}));
    const Matrix m = confusion_matrix(records);
    ASSERT_EQ(m.rows(), 3);
    ASSERT_EQ(m.cols(), 4);
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 4; ++c) EXPECT_DOUBLE_EQ(m(r, c), r == c ? 1.0 : 0.0);
}

TEST(ConfusionMatrix, EmptyPredictionsLandInNoneColumn) {
    std::vector<PredictionRecord> records = {record_from_sets(3, {}, {1, 2})};
    const Matrix m = confusion_matrix(records);
    EXPECT_DOUBLE_EQ(m(1, 3), 1.0);
    EXPECT_DOUBLE_EQ(m(2, 3), 1.0);
    EXPECT_DOUBLE_EQ(m.leftCols(3).sum(), 0.0);
}

TEST(ConfusionMatrix, MatchesDoubleLoopOracle) {
    Rng rng(15);
    const int k = 4;
    std::vector<PredictionRecord> records;
    for (int i = 0; i < 120; ++i) {
        std::vector<int> pred, truth;
        for (int c = 0; c < k; ++c) {
            if (rng.uniform() < 0.35) pred.push_back(c);
            if (rng.uniform() < 0.35) truth.push_back(c);
        }
        records.push_back(record_from_sets(k, pred, truth));
    }
    Matrix oracle = Matrix::Zero(k, k + 1);
    for (const auto& r : records)
        for (int g = 0; g < k; ++g) {
            if (!r.ground_truth.contains(g)) continue;
            if (r.predicted.empty()) {
                oracle(g, k) += 1.0;
            } else {
                for (int p = 0; p < k; ++p)
                    if (r.predicted.contains(p)) oracle(g, p) += 1.0;
            }
        }
    EXPECT_TRUE(confusion_matrix(records).isApprox(oracle, 0.0));
}

TEST(ConfusionMatrix, RowNormalizationSumsToOne) {
    std::vector<PredictionRecord> records;
    records.push_back(record_from_sets(2, {0, 1}, {0}));
    records.push_back(record_from_sets(2, {1}, {0, 1}));
    const Matrix norm = row_normalized(confusion_matrix(records));
    for (int r = 0; r < 2; ++r) EXPECT_NEAR(norm.row(r).sum(), 1.0, 1e-12);
}

namespace {

PredictionRecord localization_record(const Vector& alpha, const std::vector<int>& positive_frames,
                                     int n) {
    std::vector<LabelSet> fl(n, LabelSet(1));
    for (int f : positive_frames) fl[f].insert(0);
    Vector probs = Vector::Constant(1, 0.9);
    return make_record("loc", probs, 0.5, alpha, LabelSet(1, {0}), {}, fl);
}

}  // namespace

TEST(Localization, OneHotAttentionOnPlantedFrameHits) {
    Vector alpha = Vector::Zero(6);
    alpha[3] = 1.0;
    const auto rec = localization_record(alpha, {3}, 6);
    const LocalizationScore s = localization_score({rec}, 2);
    EXPECT_DOUBLE_EQ(s.argmax_hit_rate, 1.0);
    EXPECT_DOUBLE_EQ(s.topk_hit_rate, 1.0);
    EXPECT_DOUBLE_EQ(s.mean_attention_on_positive, 1.0);
}

TEST(Localization, UniformAttentionMassEqualsPlantedFraction) {
    const int n = 10;
    const Vector alpha = Vector::Constant(n, 1.0 / n);
    const auto rec = localization_record(alpha, {4, 5, 6}, n);
    const LocalizationScore s = localization_score({rec}, 1);
    EXPECT_NEAR(s.mean_attention_on_positive, 0.3, 1e-12);
}

TEST(Localization, RecordsWithoutFrameTruthAreSkippedAndCounted) {
    Vector alpha = Vector::Constant(4, 0.25);
    auto with = localization_record(alpha, {0}, 4);
    PredictionRecord without = make_record("w", Vector::Constant(1, 0.9), 0.5, alpha, LabelSet(1, {0}));
    const LocalizationScore s = localization_score({with, without}, 1);
    EXPECT_EQ(s.counted, 1);
    EXPECT_EQ(s.skipped, 1);
}

TEST(AttentionEncoding, NearIdentityAtFullAttention) {
    EXPECT_NEAR(attention_exponent(1.0), 1.0001, 1e-12);
    const Matrix out = encode_attention_frame(Matrix::Constant(1, 1, 0.5), 1.0);
    EXPECT_NEAR(out(0, 0), std::pow(0.5, 1.0001), 1e-12);
    EXPECT_NEAR(out(0, 0), 0.49997, 1e-4);
}

TEST(AttentionEncoding, SmallAttentionRendersNearBlack) {
    EXPECT_NEAR(attention_exponent(0.01), 100.0001, 1e-9);
    const Matrix out = encode_attention_frame(Matrix::Constant(1, 1, 0.9), 0.01);
    EXPECT_NEAR(out(0, 0), std::pow(0.9, 100.0001), 1e-12);
    EXPECT_NEAR(out(0, 0), 2.656e-5, 1e-7);
}

TEST(AttentionEncoding, ZeroAttentionCapsTheExponent) {
    EXPECT_DOUBLE_EQ(attention_exponent(0.0), 1e4);
    EXPECT_DOUBLE_EQ(attention_exponent(1e-9), 1e4);  // 1/alpha above the cap
    const Matrix out = encode_attention_frame(Matrix::Constant(1, 1, 0.9), 0.0);
    EXPECT_LT(out(0, 0), 1e-45);
}

TEST(AttentionEncoding, StrictlyMonotoneInAttentionForInteriorPixels) {
    for (double i : {0.1, 0.5, 0.9}) {
        double prev = -1.0;
        for (int step = 1; step <= 100; ++step) {
            const double alpha = 0.001 + (1.0 - 0.001) * step / 100.0;
            const double v = encode_attention_frame(Matrix::Constant(1, 1, i), alpha)(0, 0);
            EXPECT_GT(v, prev);
            prev = v;
        }
    }
}

TEST(AttentionEncoding, MapsUnitIntervalIntoItself) {
    for (double i : {0.0, 0.25, 0.5, 1.0})
        for (double a : {0.0, 0.01, 0.5, 1.0}) {
            const double v = encode_attention_frame(Matrix::Constant(1, 1, i), a)(0, 0);
            EXPECT_GE(v, 0.0);
            EXPECT_LE(v, 1.0);
        }
}
