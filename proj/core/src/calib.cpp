#include "sodcal/calib.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>

#include "sodcal/neumaier.hpp"

namespace sodcal::calib {
namespace {

void check_unit(double s, const char* what) {
    if (!(s >= 0.0 && s <= 1.0)) {
        throw DomainError(std::string(what) + ": value " + std::to_string(s) + " outside [0,1]");
    }
}

// Per-bin sufficient statistics. For each pixel, c = foreground_thresholds(s)
// thresholds classify it as foreground; the histogram over c by truth value
// reconstructs the full 256-vector of accuracies.
struct BinAccumulator {
    std::size_t count = 0;
    NeumaierSum conf_sum;
    std::array<std::uint64_t, kThresholdCount + 1> fg_by_c{};
    std::array<std::uint64_t, kThresholdCount + 1> bg_by_c{};
    std::uint64_t matches = 0;  // sum over pixels of thresholds where g(s) == truth

    void add(double s, bool foreground) {
        const std::size_t c = foreground_thresholds(s);
        ++count;
        conf_sum.add(confidence(s));
        if (foreground) {
            ++fg_by_c[c];
            matches += c;
        } else {
            ++bg_by_c[c];
            matches += kThresholdCount - c;
        }
    }

    double conf() const { return conf_sum.value() / static_cast<double>(count); }
    double macc() const {
        return static_cast<double>(matches) /
               (static_cast<double>(kThresholdCount) * static_cast<double>(count));
    }

    BinAccuracy accuracy() const {
        BinAccuracy out;
        // Threshold k classifies a pixel as foreground iff k < c.
        // fg pixels match when c > k; bg pixels match when c <= k.
        std::uint64_t fg_above = 0;  // fg pixels with c > k
        for (std::size_t c = 1; c <= kThresholdCount; ++c) fg_above += fg_by_c[c];
        std::uint64_t bg_at_most = bg_by_c[0];  // bg pixels with c <= k
        for (std::size_t k = 0; k < kThresholdCount; ++k) {
            if (k > 0) {
                fg_above -= fg_by_c[k];
                bg_at_most += bg_by_c[k];
            }
            out.acc[k] = static_cast<double>(fg_above + bg_at_most) / static_cast<double>(count);
        }
        out.macc = macc();
        return out;
    }

    BinStats stats(std::size_t index) const {
        BinStats s;
        s.index = index;
        s.count = count;
        if (count > 0) {
            s.conf = conf();
            s.macc = macc();
        }
        return s;
    }
};

using Accumulators = std::array<BinAccumulator, kBinCount>;

void accumulate(const SaliencyMap& prediction, const BinaryMask& truth, Accumulators& bins) {
    if (!prediction.same_shape(truth)) {
        throw ArgumentError("calibration: prediction and ground truth dimensions differ");
    }
    for (std::size_t i = 0; i < prediction.size(); ++i) {
        const double s = prediction[i];
        bins[assign_bin(s)].add(s, truth[i] == 1.0);
    }
}

double measure(const Accumulators& bins, std::size_t pixel_count) {
    double total = 0.0;
    for (const auto& b : bins) {
        if (b.count == 0) continue;
        const double weight = static_cast<double>(b.count) / static_cast<double>(pixel_count);
        total += weight * std::abs(b.macc() - b.conf());
    }
    return total;
}

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

std::size_t foreground_thresholds(double s) {
    check_unit(s, "foreground_thresholds");
    if (s == 0.0) return 0;
    auto c = static_cast<std::ptrdiff_t>(std::floor(s * 255.0));
    c = std::min<std::ptrdiff_t>(std::max<std::ptrdiff_t>(c, 0), 255);
    while (c < 255 && static_cast<double>(c + 1) / 255.0 <= s) ++c;
    while (c > 0 && static_cast<double>(c) / 255.0 > s) --c;
    return static_cast<std::size_t>(c) + 1;
}

std::size_t assign_bin(double s) {
    check_unit(s, "assign_bin");
    if (s == 0.0) return 0;
    if (s == 1.0) return kBinCount - 1;
    for (std::size_t k = 1; k <= 10; ++k) {
        if (s <= static_cast<double>(k) / 10.0) return k;
    }
    return 10;  // unreachable: s < 1 always satisfies k = 10
}

double bin_lower(std::size_t bin) {
    if (bin == 0) return 0.0;
    if (bin >= kBinCount - 1) return 1.0;
    return static_cast<double>(bin - 1) / 10.0;
}

double bin_upper(std::size_t bin) {
    if (bin == 0) return 0.0;
    if (bin >= kBinCount - 1) return 1.0;
    return static_cast<double>(bin) / 10.0;
}

double confidence(double s) {
    check_unit(s, "confidence");
    return std::max(s, 1.0 - s);
}

std::optional<BinAccuracy> bin_accuracy(const SaliencyMap& prediction, const BinaryMask& truth,
                                        std::size_t bin) {
    if (bin >= kBinCount) {
        throw ArgumentError("bin_accuracy: bin index out of range");
    }
    Accumulators bins;
    accumulate(prediction, truth, bins);
    if (bins[bin].count == 0) return std::nullopt;
    return bins[bin].accuracy();
}

ImageCalibration image_calibration(const SaliencyMap& prediction, const BinaryMask& truth) {
    Accumulators bins;
    accumulate(prediction, truth, bins);
    ImageCalibration out;
    out.value = measure(bins, prediction.size());
    for (std::size_t m = 0; m < kBinCount; ++m) out.bins[m] = bins[m].stats(m);
    return out;
}

CalibrationReport dataset_calibration(std::span<const EvalPair> pairs) {
    if (pairs.empty()) {
        throw ArgumentError("dataset_calibration: no images");
    }
    CalibrationReport report;
    Accumulators pooled;
    std::array<NeumaierSum, kBinCount> conf_means;
    std::array<NeumaierSum, kBinCount> macc_means;
    std::array<std::size_t, kBinCount> occupied{};
    NeumaierSum total;

    for (const auto& pair : pairs) {
        Accumulators bins;
        accumulate(pair.prediction.get(), pair.truth.get(), bins);
        const double value = measure(bins, pair.prediction.get().size());
        report.per_image.push_back({pair.id, value});
        total.add(value);
        for (std::size_t m = 0; m < kBinCount; ++m) {
            const auto& b = bins[m];
            if (b.count == 0) continue;
            ++occupied[m];
            conf_means[m].add(b.conf());
            macc_means[m].add(b.macc());
            auto& p = pooled[m];
            p.count += b.count;
            p.conf_sum.add(b.conf_sum.value());
            p.matches += b.matches;
            for (std::size_t c = 0; c <= kThresholdCount; ++c) {
                p.fg_by_c[c] += b.fg_by_c[c];
                p.bg_by_c[c] += b.bg_by_c[c];
            }
        }
    }

    report.dataset = total.value() / static_cast<double>(pairs.size());
    for (std::size_t m = 0; m < kBinCount; ++m) {
        report.bins[m] = pooled[m].stats(m);
        BinStats& mean = report.mean_bins[m];
        mean.index = m;
        mean.count = occupied[m];
        if (occupied[m] > 0) {
            mean.conf = conf_means[m].value() / static_cast<double>(occupied[m]);
            mean.macc = macc_means[m].value() / static_cast<double>(occupied[m]);
        }
    }
    return report;
}

std::string reliability_csv(const BinTable& bins) {
    std::string out = "bin,lo,hi,count,conf,macc\n";
    for (const auto& b : bins) {
        out += std::to_string(b.index) + ',' + format_double(bin_lower(b.index)) + ',' +
               format_double(bin_upper(b.index)) + ',' + std::to_string(b.count) + ',' +
               (b.conf ? format_double(*b.conf) : std::string()) + ',' +
               (b.macc ? format_double(*b.macc) : std::string()) + '\n';
    }
    return out;
}

}  // namespace sodcal::calib
