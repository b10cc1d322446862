#pragma once

#include <array>
#include <cstddef>
#include <span>

#include "sodcal/calib.hpp"
#include "sodcal/maps.hpp"

namespace sodcal::metrics {

inline constexpr double kDefaultBeta2 = 0.3;

// Mean absolute error between a prediction and its binary ground truth.
double mae(const SaliencyMap& prediction, const BinaryMask& truth);

struct FCurve {
    std::array<double, calib::kThresholdCount> precision{};
    std::array<double, calib::kThresholdCount> recall{};
    std::array<double, calib::kThresholdCount> f{};
    double max_f = 0.0;
    double mean_f = 0.0;
    double beta2 = kDefaultBeta2;
};

// Precision, recall and F_beta at each threshold, with g as in calib.
// Throws DegenerateGroundTruthError when the truth has no foreground.
FCurve fbeta_curve(const SaliencyMap& prediction, const BinaryMask& truth,
                   double beta2 = kDefaultBeta2);

// Dataset curve: precision and recall averaged over images per threshold,
// then combined into F_beta.
FCurve average_curves(std::span<const FCurve> curves, double beta2 = kDefaultBeta2);

}  // namespace sodcal::metrics
