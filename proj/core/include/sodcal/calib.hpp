#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sodcal/maps.hpp"

namespace sodcal::calib {

// Bin 0 holds s == 0, bin 11 holds s == 1, bins 1..10 hold ((k-1)/10, k/10].
inline constexpr std::size_t kBinCount = 12;
// Thresholds t_k = k / 255 for k = 0..255; g(s) = 1 iff s >= t_k and s > 0,
// so an exact 0 is background and an exact 1 foreground at every threshold.
inline constexpr std::size_t kThresholdCount = 256;

// Number of thresholds at which g(s) = 1, in 0..256. Threshold k marks a
// pixel foreground iff k < foreground_thresholds(s).
std::size_t foreground_thresholds(double s);

std::size_t assign_bin(double s);
double bin_lower(std::size_t bin);
double bin_upper(std::size_t bin);

// max(s, 1 - s)
double confidence(double s);

struct BinAccuracy {
    std::array<double, kThresholdCount> acc{};
    double macc = 0.0;
};

// Per-threshold accuracy of the pixels falling in `bin`; empty bins yield nullopt.
std::optional<BinAccuracy> bin_accuracy(const SaliencyMap& prediction, const BinaryMask& truth,
                                        std::size_t bin);

struct BinStats {
    std::size_t index = 0;
    std::size_t count = 0;
    std::optional<double> conf;  // absent when count == 0
    std::optional<double> macc;
};

using BinTable = std::array<BinStats, kBinCount>;

struct ImageCalibration {
    double value = 0.0;  // dense calibration measure of one image
    BinTable bins;
};

ImageCalibration image_calibration(const SaliencyMap& prediction, const BinaryMask& truth);

struct EvalPair {
    std::string id;
    std::reference_wrapper<const SaliencyMap> prediction;
    std::reference_wrapper<const BinaryMask> truth;
};

struct CalibrationReport {
    struct ImageEntry {
        std::string id;
        double value = 0.0;
    };
    std::vector<ImageEntry> per_image;
    BinTable bins;        // pixel-pooled over every image
    BinTable mean_bins;   // per-image conf/macc averaged over images where the bin is occupied
    double dataset = 0.0; // mean of the per-image values
};

CalibrationReport dataset_calibration(std::span<const EvalPair> pairs);

// `bin,lo,hi,count,conf,macc` with one row per bin; absent stats are empty fields.
std::string reliability_csv(const BinTable& bins);

}  // namespace sodcal::calib
