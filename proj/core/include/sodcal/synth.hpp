#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "sodcal/maps.hpp"

namespace sodcal::synth {

struct SynthConfig {
    std::size_t size = 48;
    std::size_t count = 1;
    std::uint64_t seed = 0;
    double noise_sigma = 0.05;
    double min_color_gap = 0.4;  // Euclidean RGB distance between the two base colors

    void validate() const;
};

struct Sample {
    RgbImage image;
    BinaryMask mask;
    std::string id;
};

inline constexpr double kMinForeground = 0.05;
inline constexpr double kMaxForeground = 0.6;
inline constexpr int kMaxAttempts = 100;

// One image with a single disc or rectangle. Every random draw comes from
// SplitMix64 seeded with `state`, in this order:
//   shape: kind (u < 0.5 -> disc), radius r ~ U[size/8, size/3.5],
//          [rectangle only: aspect a ~ U[0.5, 2]], center x, center y;
//          redrawn until the foreground fraction lies in [0.05, 0.6];
//   colors: background base (R, G, B) ~ U[0, 0.6]^3, then foreground
//          (R, G, B) ~ U[0.4, 1]^3, foreground redrawn until its distance
//          to the background base is >= min_color_gap;
//   noise: row-major pixels, channels R, G, B, one Box-Muller normal each.
// Returns the sample and the generator state after the last draw.
std::pair<Sample, std::uint64_t> generate_sample(const SynthConfig& cfg, std::uint64_t state,
                                                 std::string id = "0000");

// `count` samples threading one generator state from cfg.seed; ids are
// zero-padded indices.
std::vector<Sample> generate_dataset(const SynthConfig& cfg);

// FNV-1a over the IEEE-754 bit patterns of image and mask values.
std::uint64_t checksum(const Sample& sample);

}  // namespace sodcal::synth
