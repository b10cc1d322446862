#include "sodcal/synth.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "sodcal/splitmix64.hpp"

namespace sodcal::synth {
namespace {

constexpr double kBackgroundLo = 0.0;
constexpr double kBackgroundHi = 0.6;
constexpr double kForegroundLo = 0.4;
constexpr double kForegroundHi = 1.0;

struct Shape {
    bool disc = true;
    double cx = 0.0;
    double cy = 0.0;
    double radius = 0.0;
    double half_w = 0.0;
    double half_h = 0.0;

    bool contains(double u, double v) const {
        if (disc) {
            return (u - cx) * (u - cx) + (v - cy) * (v - cy) <= radius * radius;
        }
        return std::abs(u - cx) <= half_w && std::abs(v - cy) <= half_h;
    }
};

Shape draw_shape(SplitMix64& rng, double size) {
    Shape s;
    s.disc = rng.uniform() < 0.5;
    s.radius = rng.uniform(size / 8.0, size / 3.5);
    double ext_x = s.radius;
    double ext_y = s.radius;
    if (!s.disc) {
        // Rectangle with the disc's area.
        const double aspect = rng.uniform(0.5, 2.0);
        s.half_w = 0.5 * s.radius * std::sqrt(std::numbers::pi * aspect);
        s.half_h = 0.5 * s.radius * std::sqrt(std::numbers::pi / aspect);
        ext_x = s.half_w;
        ext_y = s.half_h;
    }
    s.cx = rng.uniform(ext_x, size - 1.0 - ext_x);
    s.cy = rng.uniform(ext_y, size - 1.0 - ext_y);
    return s;
}

}  // namespace

void SynthConfig::validate() const {
    if (size < 16) throw ArgumentError("synth: size must be >= 16");
    if (count < 1) throw ArgumentError("synth: count must be >= 1");
    if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) {
        throw ArgumentError("synth: noise sigma must be finite and non-negative");
    }
    if (!(min_color_gap >= 0.0) || !std::isfinite(min_color_gap)) {
        throw ArgumentError("synth: color gap must be finite and non-negative");
    }
}

std::pair<Sample, std::uint64_t> generate_sample(const SynthConfig& cfg, std::uint64_t state,
                                                 std::string id) {
    cfg.validate();
    SplitMix64 rng(state);
    const std::size_t n = cfg.size;
    const auto side = static_cast<double>(n);

    std::vector<double> mask(n * n, 0.0);
    bool shape_ok = false;
    for (int attempt = 0; attempt < kMaxAttempts && !shape_ok; ++attempt) {
        const Shape shape = draw_shape(rng, side);
        std::size_t fg = 0;
        for (std::size_t v = 0; v < n; ++v) {
            for (std::size_t u = 0; u < n; ++u) {
                const bool inside = shape.contains(static_cast<double>(u), static_cast<double>(v));
                mask[v * n + u] = inside ? 1.0 : 0.0;
                fg += inside;
            }
        }
        const double fraction = static_cast<double>(fg) / static_cast<double>(n * n);
        shape_ok = fraction >= kMinForeground && fraction <= kMaxForeground;
    }
    if (!shape_ok) {
        throw GenerationError("synth: no shape with admissible foreground fraction after 100 attempts");
    }

    double bg[3];
    double fgc[3];
    for (double& c : bg) c = rng.uniform(kBackgroundLo, kBackgroundHi);
    bool color_ok = false;
    for (int attempt = 0; attempt < kMaxAttempts && !color_ok; ++attempt) {
        for (double& c : fgc) c = rng.uniform(kForegroundLo, kForegroundHi);
        double d2 = 0.0;
        for (int c = 0; c < 3; ++c) d2 += (fgc[c] - bg[c]) * (fgc[c] - bg[c]);
        color_ok = std::sqrt(d2) >= cfg.min_color_gap;
    }
    if (!color_ok) {
        throw GenerationError("synth: no foreground color with the required gap after 100 attempts");
    }

    std::vector<double> pixels(n * n * 3);
    for (std::size_t p = 0; p < n * n; ++p) {
        const double* base = mask[p] == 1.0 ? fgc : bg;
        for (std::size_t c = 0; c < 3; ++c) {
            pixels[p * 3 + c] = std::clamp(base[c] + cfg.noise_sigma * rng.normal(), 0.0, 1.0);
        }
    }

    Sample sample{RgbImage(n, n, std::move(pixels)), BinaryMask(n, n, std::move(mask)),
                  std::move(id)};
    return {std::move(sample), rng.state()};
}

std::vector<Sample> generate_dataset(const SynthConfig& cfg) {
    cfg.validate();
    std::vector<Sample> out;
    out.reserve(cfg.count);
    std::uint64_t state = cfg.seed;
    for (std::size_t i = 0; i < cfg.count; ++i) {
        char id[32];
        std::snprintf(id, sizeof id, "%04zu", i);
        auto [sample, next] = generate_sample(cfg, state, id);
        out.push_back(std::move(sample));
        state = next;
    }
    return out;
}

std::uint64_t checksum(const Sample& sample) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&h](double v) {
        auto bits = std::bit_cast<std::uint64_t>(v);
        for (int i = 0; i < 8; ++i) {
            h ^= (bits >> (8 * i)) & 0xFF;
            h *= 0x100000001b3ULL;
        }
    };
    for (double v : sample.image.values()) mix(v);
    for (double v : sample.mask.values()) mix(v);
    return h;
}

}  // namespace sodcal::synth
