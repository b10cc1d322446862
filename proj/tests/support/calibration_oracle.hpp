#pragma once

// Literal nested-loop transcription of the dense calibration measure, kept
// deliberately naive and independent of the library's histogram path.

#include <cmath>
#include <cstddef>
#include <vector>

namespace sodcal::oracle {

// g(s) at threshold t: foreground iff s >= t, except that an exact 0 is
// never foreground.
inline double classify(double s, double t) { return s > 0.0 && s >= t ? 1.0 : 0.0; }

inline int bin_of(double s) {
    if (s == 0.0) return 0;
    if (s == 1.0) return 11;
    for (int k = 1; k <= 10; ++k) {
        const double lo = (k - 1) / 10.0;
        const double hi = k / 10.0;
        if (s > lo && s <= hi) return k;
    }
    return -1;
}

// pred and gt are row-major with equal length; gt holds 0 or 1.
inline double image_calibration(const std::vector<double>& pred, const std::vector<double>& gt) {
    const std::size_t n = pred.size();
    double c = 0.0;
    for (int m = 0; m < 12; ++m) {
        std::vector<std::size_t> members;
        for (std::size_t p = 0; p < n; ++p) {
            if (bin_of(pred[p]) == m) members.push_back(p);
        }
        if (members.empty()) continue;
        const double size = static_cast<double>(members.size());

        double macc = 0.0;
        for (int k = 0; k < 256; ++k) {
            const double threshold = k / 255.0;
            double hits = 0.0;
            for (std::size_t p : members) {
                const double g = classify(pred[p], threshold);
                if (g == gt[p]) hits += 1.0;
            }
            macc += hits / size;
        }
        macc /= 256.0;

        double conf = 0.0;
        for (std::size_t p : members) conf += std::max(pred[p], 1.0 - pred[p]);
        conf /= size;

        c += size / static_cast<double>(n) * std::abs(macc - conf);
    }
    return c;
}

// Brute-force per-threshold bin accuracy.
inline std::vector<double> bin_accuracy(const std::vector<double>& pred,
                                        const std::vector<double>& gt, int bin) {
    std::vector<double> acc(256, 0.0);
    std::size_t size = 0;
    for (std::size_t p = 0; p < pred.size(); ++p) size += bin_of(pred[p]) == bin;
    if (size == 0) return {};
    for (int k = 0; k < 256; ++k) {
        double hits = 0.0;
        for (std::size_t p = 0; p < pred.size(); ++p) {
            if (bin_of(pred[p]) != bin) continue;
            const double g = classify(pred[p], k / 255.0);
            hits += g == gt[p];
        }
        acc[static_cast<std::size_t>(k)] = hits / static_cast<double>(size);
    }
    return acc;
}

}  // namespace sodcal::oracle
