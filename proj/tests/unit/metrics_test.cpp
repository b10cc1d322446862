#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "sodcal/metrics.hpp"
#include "test_maps.hpp"

namespace sodcal::metrics {
namespace {

using sodcal::testing::constant_map;
using sodcal::testing::random_mask;
using sodcal::testing::random_u8_map;
using sodcal::testing::step_mask;

struct BrutePr {
    double p;
    double r;
};

BrutePr brute_pr(const SaliencyMap& pred, const BinaryMask& gt, int k) {
    double tp = 0.0;
    double fp = 0.0;
    double pos = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const bool g = pred[i] > 0.0 && pred[i] >= k / 255.0;
        const bool y = gt[i] == 1.0;
        tp += g && y;
        fp += g && !y;
        pos += y;
    }
    return {tp + fp > 0.0 ? tp / (tp + fp) : 0.0, tp / pos};
}

TEST(Mae, Values) {
    const BinaryMask gt = step_mask(4, 2, 2);
    EXPECT_EQ(mae(to_saliency(gt), gt), 0.0);
    EXPECT_EQ(mae(constant_map(4, 2, 0.5), gt), 0.5);
    EXPECT_EQ(mae(constant_map(4, 2, 1.0), gt), 0.5);
    const SaliencyMap p(4, 2, std::vector<double>{0.25, 0, 1, 1, 0, 0, 1, 0.5});
    EXPECT_EQ(mae(p, gt), 0.75 / 8.0);
    EXPECT_THROW(mae(constant_map(3, 2, 0.5), gt), ArgumentError);
}

TEST(FbetaCurve, MatchesBruteForce) {
    SplitMix64 rng(11);
    for (int trial = 0; trial < 40; ++trial) {
        const SaliencyMap pred = random_u8_map(9, 7, rng);
        BinaryMask gt = random_mask(9, 7, rng, 0.4);
        if (std::all_of(gt.values().begin(), gt.values().end(), [](double v) { return v == 0; })) {
            continue;
        }
        const FCurve c = fbeta_curve(pred, gt);
        double best = 0.0;
        for (int k = 0; k < 256; ++k) {
            const BrutePr b = brute_pr(pred, gt, k);
            EXPECT_EQ(c.precision[k], b.p);
            EXPECT_EQ(c.recall[k], b.r);
            const double f = b.p + b.r > 0.0 ? 1.3 * b.p * b.r / (0.3 * b.p + b.r) : 0.0;
            EXPECT_NEAR(c.f[k], f, 1e-15);
            best = std::max(best, f);
        }
        EXPECT_NEAR(c.max_f, best, 1e-15);
    }
}

TEST(FbetaCurve, PerfectPredictionReachesOne) {
    const BinaryMask gt = step_mask(8, 8, 3);
    const FCurve c = fbeta_curve(to_saliency(gt), gt);
    EXPECT_EQ(c.max_f, 1.0);
    EXPECT_EQ(c.recall[0], 1.0);
    EXPECT_EQ(c.precision[0], 1.0);
    EXPECT_EQ(c.precision[255], 1.0);
}

TEST(FbetaCurve, ZeroPredictionPrecisionIsZero) {
    const BinaryMask gt = step_mask(8, 8, 3);
    const FCurve c = fbeta_curve(constant_map(8, 8, 0.0), gt);
    for (int k = 0; k < 256; ++k) {
        EXPECT_EQ(c.precision[k], 0.0);
        EXPECT_EQ(c.recall[k], 0.0);
        EXPECT_EQ(c.f[k], 0.0);
    }
}

TEST(FbetaCurve, Errors) {
    EXPECT_THROW(fbeta_curve(constant_map(4, 4, 0.5), BinaryMask::filled(4, 4, 0.0)),
                 DegenerateGroundTruthError);
    EXPECT_THROW(fbeta_curve(constant_map(4, 4, 0.5), step_mask(4, 4, 2), 0.0), DomainError);
    EXPECT_THROW(fbeta_curve(constant_map(4, 4, 0.5), step_mask(4, 3, 2)), ArgumentError);
}

TEST(FbetaCurve, BetaControlsWeighting) {
    const BinaryMask gt = step_mask(10, 1, 5);
    // Everything is foreground at threshold 0: P = 0.5, R = 1.
    const FCurve c1 = fbeta_curve(constant_map(10, 1, 0.2), gt, 1.0);
    EXPECT_NEAR(c1.f[0], 2.0 / 3.0, 1e-15);
    const FCurve c03 = fbeta_curve(constant_map(10, 1, 0.2), gt, 0.3);
    EXPECT_NEAR(c03.f[0], 1.3 * 0.5 / (0.15 + 1.0), 1e-15);
}

TEST(AverageCurves, AveragesPrecisionAndRecall) {
    SplitMix64 rng(21);
    std::vector<FCurve> curves;
    for (int i = 0; i < 3; ++i) {
        curves.push_back(fbeta_curve(random_u8_map(6, 6, rng), step_mask(6, 6, 2)));
    }
    const FCurve avg = average_curves(curves);
    for (std::size_t k = 0; k < 256; ++k) {
        const double p = (curves[0].precision[k] + curves[1].precision[k] + curves[2].precision[k]) / 3.0;
        const double r = (curves[0].recall[k] + curves[1].recall[k] + curves[2].recall[k]) / 3.0;
        EXPECT_NEAR(avg.precision[k], p, 1e-15);
        EXPECT_NEAR(avg.recall[k], r, 1e-15);
    }
    const FCurve single = average_curves(std::span<const FCurve>(curves.data(), 1));
    EXPECT_EQ(single.max_f, curves[0].max_f);
}

}  // namespace
}  // namespace sodcal::metrics
