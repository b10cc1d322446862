#pragma once

#include <cstddef>
#include <span>

#include "sodcal/maps.hpp"

namespace sodcal::uats {

// Balance factor in T = exp(alpha * U).
class Alpha {
public:
    constexpr Alpha() noexcept = default;
    explicit Alpha(double value) : value_(value) {
        if (!(value >= 0.0) || !std::isfinite(value)) {
            throw DomainError("Alpha must be a finite non-negative real");
        }
    }
    constexpr double value() const noexcept { return value_; }

private:
    double value_ = 1.0;
};

// Overflow-free logistic function.
inline double sigmoid(double z) noexcept {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

SaliencyMap sigmoid(const LogitMap& z);

// s' = 1 / (1 + exp(-z / T)), pointwise.
SaliencyMap relaxed_sigmoid(const LogitMap& z, const TemperatureMap& temperature);

// T = exp(alpha * U), in [1, e^alpha].
TemperatureMap temperature_from_uncertainty(const UncertaintyMap& uncertainty, Alpha alpha);

// U = clamp(4 * population variance of the heads, 0, 1). Needs >= 2 heads.
UncertaintyMap uncertainty_from_heads(std::span<const SaliencyMap> predictions);

// T = exp(e), e = Sobel magnitude of luminance normalized by its image maximum.
TemperatureMap edge_temperature(const RgbImage& image);

// Normalized edge map e in [0,1] backing edge_temperature.
PixelGrid edge_map(const RgbImage& image);

TemperatureMap uniform_temperature(std::size_t width, std::size_t height, double t);

// Softened output relaxed_sigmoid(z, exp(alpha * U)).
SaliencyMap apply_uats(const LogitMap& z, const UncertaintyMap& uncertainty, Alpha alpha);

}  // namespace sodcal::uats
