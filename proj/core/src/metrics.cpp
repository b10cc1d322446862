#include "sodcal/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "sodcal/neumaier.hpp"

namespace sodcal::metrics {
namespace {

double f_beta(double p, double r, double beta2) {
    const double denom = beta2 * p + r;
    return denom > 0.0 ? (1.0 + beta2) * p * r / denom : 0.0;
}

void finish(FCurve& curve) {
    NeumaierSum sum;
    curve.max_f = 0.0;
    for (std::size_t k = 0; k < calib::kThresholdCount; ++k) {
        curve.f[k] = f_beta(curve.precision[k], curve.recall[k], curve.beta2);
        curve.max_f = std::max(curve.max_f, curve.f[k]);
        sum.add(curve.f[k]);
    }
    curve.mean_f = sum.value() / static_cast<double>(calib::kThresholdCount);
}

void check_beta2(double beta2) {
    if (!(beta2 > 0.0) || !std::isfinite(beta2)) {
        throw DomainError("beta2 must be a positive finite real");
    }
}

}  // namespace

double mae(const SaliencyMap& prediction, const BinaryMask& truth) {
    if (!prediction.same_shape(truth)) {
        throw ArgumentError("mae: prediction and ground truth dimensions differ");
    }
    NeumaierSum sum;
    for (std::size_t i = 0; i < prediction.size(); ++i) {
        sum.add(std::abs(prediction[i] - truth[i]));
    }
    return sum.value() / static_cast<double>(prediction.size());
}

FCurve fbeta_curve(const SaliencyMap& prediction, const BinaryMask& truth, double beta2) {
    if (!prediction.same_shape(truth)) {
        throw ArgumentError("fbeta_curve: prediction and ground truth dimensions differ");
    }
    check_beta2(beta2);

    std::array<std::uint64_t, calib::kThresholdCount + 1> fg_by_c{};
    std::array<std::uint64_t, calib::kThresholdCount + 1> bg_by_c{};
    std::uint64_t positives = 0;
    for (std::size_t i = 0; i < prediction.size(); ++i) {
        const double s = prediction[i];
        const std::size_t c = calib::foreground_thresholds(s);
        if (truth[i] == 1.0) {
            ++fg_by_c[c];
            ++positives;
        } else {
            ++bg_by_c[c];
        }
    }
    if (positives == 0) {
        throw DegenerateGroundTruthError("fbeta_curve: ground truth has no foreground pixels");
    }

    FCurve curve;
    curve.beta2 = beta2;
    std::uint64_t tp = 0;
    std::uint64_t fp = 0;
    for (std::size_t c = 1; c <= calib::kThresholdCount; ++c) {
        tp += fg_by_c[c];
        fp += bg_by_c[c];
    }
    // Threshold k marks pixels with c > k.
    for (std::size_t k = 0; k < calib::kThresholdCount; ++k) {
        if (k > 0) {
            tp -= fg_by_c[k];
            fp -= bg_by_c[k];
        }
        const std::uint64_t predicted = tp + fp;
        curve.precision[k] =
            predicted > 0 ? static_cast<double>(tp) / static_cast<double>(predicted) : 0.0;
        curve.recall[k] = static_cast<double>(tp) / static_cast<double>(positives);
    }
    finish(curve);
    return curve;
}

FCurve average_curves(std::span<const FCurve> curves, double beta2) {
    check_beta2(beta2);
    FCurve out;
    out.beta2 = beta2;
    if (curves.empty()) return out;
    for (std::size_t k = 0; k < calib::kThresholdCount; ++k) {
        NeumaierSum p;
        NeumaierSum r;
        for (const auto& c : curves) {
            p.add(c.precision[k]);
            r.add(c.recall[k]);
        }
        out.precision[k] = p.value() / static_cast<double>(curves.size());
        out.recall[k] = r.value() / static_cast<double>(curves.size());
    }
    finish(out);
    return out;
}

}  // namespace sodcal::metrics
