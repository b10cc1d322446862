#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sodcal/error.hpp"

namespace sodcal {

// Row-major 2-D grid of finite doubles; pixel (x, y) lives at y * width + x.
class PixelGrid {
public:
    PixelGrid(std::size_t width, std::size_t height, double fill = 0.0);
    PixelGrid(std::size_t width, std::size_t height, std::vector<double> data);

    std::size_t width() const noexcept { return width_; }
    std::size_t height() const noexcept { return height_; }
    std::size_t size() const noexcept { return data_.size(); }

    double operator()(std::size_t x, std::size_t y) const noexcept { return data_[y * width_ + x]; }
    double operator[](std::size_t i) const noexcept { return data_[i]; }
    std::span<const double> values() const& noexcept { return data_; }
    std::span<const double> values() const&& = delete;

    bool same_shape(const PixelGrid& other) const noexcept {
        return width_ == other.width_ && height_ == other.height_;
    }

    friend bool operator==(const PixelGrid&, const PixelGrid&) = default;

private:
    std::size_t width_;
    std::size_t height_;
    std::vector<double> data_;
};

// A PixelGrid whose every value satisfies Traits::admits. Each traits type
// yields a distinct map type, so a SoftLabelMap cannot be passed where a
// SaliencyMap is expected without an explicit conversion.
template <class Traits>
class ConstrainedGrid {
public:
    explicit ConstrainedGrid(PixelGrid grid) : grid_(std::move(grid)) {
        for (double v : grid_.values()) {
            if (!Traits::admits(v)) {
                throw ValidationError(std::string(Traits::name) + ": value " + std::to_string(v) +
                                      " violates " + Traits::constraint);
            }
        }
    }
    ConstrainedGrid(std::size_t width, std::size_t height, std::vector<double> data)
        : ConstrainedGrid(PixelGrid(width, height, std::move(data))) {}

    static ConstrainedGrid filled(std::size_t width, std::size_t height, double value) {
        return ConstrainedGrid(PixelGrid(width, height, value));
    }

    const PixelGrid& grid() const& noexcept { return grid_; }
    const PixelGrid& grid() const&& = delete;
    std::size_t width() const noexcept { return grid_.width(); }
    std::size_t height() const noexcept { return grid_.height(); }
    std::size_t size() const noexcept { return grid_.size(); }
    double operator()(std::size_t x, std::size_t y) const noexcept { return grid_(x, y); }
    double operator[](std::size_t i) const noexcept { return grid_[i]; }
    std::span<const double> values() const& noexcept { return grid_.values(); }
    std::span<const double> values() const&& = delete;

    template <class Other>
    bool same_shape(const ConstrainedGrid<Other>& other) const noexcept {
        return grid_.same_shape(other.grid());
    }
    bool same_shape(const PixelGrid& other) const noexcept { return grid_.same_shape(other); }

    friend bool operator==(const ConstrainedGrid&, const ConstrainedGrid&) = default;

private:
    PixelGrid grid_;
};

namespace detail {
inline bool in_unit_interval(double v) noexcept { return v >= 0.0 && v <= 1.0; }
}  // namespace detail

struct BinaryTraits {
    static constexpr const char* name = "BinaryMask";
    static constexpr const char* constraint = "value in {0,1}";
    static bool admits(double v) noexcept { return v == 0.0 || v == 1.0; }
};
struct SaliencyTraits {
    static constexpr const char* name = "SaliencyMap";
    static constexpr const char* constraint = "value in [0,1]";
    static bool admits(double v) noexcept { return detail::in_unit_interval(v); }
};
struct SoftLabelTraits {
    static constexpr const char* name = "SoftLabelMap";
    static constexpr const char* constraint = "value in [0,1]";
    static bool admits(double v) noexcept { return detail::in_unit_interval(v); }
};
struct UncertaintyTraits {
    static constexpr const char* name = "UncertaintyMap";
    static constexpr const char* constraint = "value in [0,1]";
    static bool admits(double v) noexcept { return detail::in_unit_interval(v); }
};
struct LogitTraits {
    static constexpr const char* name = "LogitMap";
    static constexpr const char* constraint = "finite value";
    static bool admits(double v) noexcept { return std::isfinite(v); }
};
struct TemperatureTraits {
    static constexpr const char* name = "TemperatureMap";
    static constexpr const char* constraint = "finite value >= 1";
    static bool admits(double v) noexcept { return std::isfinite(v) && v >= 1.0; }
};

using BinaryMask = ConstrainedGrid<BinaryTraits>;
using SaliencyMap = ConstrainedGrid<SaliencyTraits>;
using SoftLabelMap = ConstrainedGrid<SoftLabelTraits>;
using UncertaintyMap = ConstrainedGrid<UncertaintyTraits>;
using LogitMap = ConstrainedGrid<LogitTraits>;
using TemperatureMap = ConstrainedGrid<TemperatureTraits>;

// Binary masks are valid soft labels and valid predictions.
SoftLabelMap to_soft_label(const BinaryMask& mask);
SaliencyMap to_saliency(const BinaryMask& mask);

// Three interleaved channels per pixel (R, G, B), each in [0,1].
class RgbImage {
public:
    RgbImage(std::size_t width, std::size_t height, std::vector<double> data);

    std::size_t width() const noexcept { return width_; }
    std::size_t height() const noexcept { return height_; }
    std::size_t pixel_count() const noexcept { return width_ * height_; }
    double operator()(std::size_t x, std::size_t y, std::size_t c) const noexcept {
        return data_[(y * width_ + x) * 3 + c];
    }
    std::span<const double> values() const& noexcept { return data_; }
    std::span<const double> values() const&& = delete;

    friend bool operator==(const RgbImage&, const RgbImage&) = default;

private:
    std::size_t width_;
    std::size_t height_;
    std::vector<double> data_;
};

class ByteGrid {
public:
    ByteGrid(std::size_t width, std::size_t height, std::vector<std::uint8_t> data);

    std::size_t width() const noexcept { return width_; }
    std::size_t height() const noexcept { return height_; }
    std::size_t size() const noexcept { return data_.size(); }
    std::uint8_t operator[](std::size_t i) const noexcept { return data_[i]; }
    std::span<const std::uint8_t> values() const& noexcept { return data_; }
    std::span<const std::uint8_t> values() const&& = delete;

    friend bool operator==(const ByteGrid&, const ByteGrid&) = default;

private:
    std::size_t width_;
    std::size_t height_;
    std::vector<std::uint8_t> data_;
};

// round(v * 255) with halves rounded up.
ByteGrid quantize_u8(const SaliencyMap& map);
SaliencyMap dequantize_u8(const ByteGrid& grid);

}  // namespace sodcal
