#include "sodcal/maps.hpp"

#include <algorithm>
#include <cmath>

namespace sodcal {
namespace {

void check_dims(std::size_t width, std::size_t height, std::size_t length, std::size_t channels,
                const char* what) {
    if (width == 0 || height == 0) {
        throw ArgumentError(std::string(what) + ": width and height must be positive");
    }
    if (length != width * height * channels) {
        throw ArgumentError(std::string(what) + ": data length " + std::to_string(length) +
                            " does not match " + std::to_string(width) + "x" +
                            std::to_string(height) + "x" + std::to_string(channels));
    }
}

}  // namespace

PixelGrid::PixelGrid(std::size_t width, std::size_t height, double fill)
    : PixelGrid(width, height, std::vector<double>(width * height, fill)) {}

PixelGrid::PixelGrid(std::size_t width, std::size_t height, std::vector<double> data)
    : width_(width), height_(height), data_(std::move(data)) {
    check_dims(width_, height_, data_.size(), 1, "PixelGrid");
    if (!std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); })) {
        throw ValidationError("PixelGrid: non-finite value");
    }
}

SoftLabelMap to_soft_label(const BinaryMask& mask) { return SoftLabelMap(mask.grid()); }

SaliencyMap to_saliency(const BinaryMask& mask) { return SaliencyMap(mask.grid()); }

RgbImage::RgbImage(std::size_t width, std::size_t height, std::vector<double> data)
    : width_(width), height_(height), data_(std::move(data)) {
    check_dims(width_, height_, data_.size(), 3, "RgbImage");
    for (double v : data_) {
        if (!(v >= 0.0 && v <= 1.0)) {
            throw ValidationError("RgbImage: channel value outside [0,1]");
        }
    }
}

ByteGrid::ByteGrid(std::size_t width, std::size_t height, std::vector<std::uint8_t> data)
    : width_(width), height_(height), data_(std::move(data)) {
    check_dims(width_, height_, data_.size(), 1, "ByteGrid");
}

ByteGrid quantize_u8(const SaliencyMap& map) {
    std::vector<std::uint8_t> out(map.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double scaled = std::floor(map[i] * 255.0 + 0.5);
        out[i] = static_cast<std::uint8_t>(std::clamp(scaled, 0.0, 255.0));
    }
    return ByteGrid(map.width(), map.height(), std::move(out));
}

SaliencyMap dequantize_u8(const ByteGrid& grid) {
    std::vector<double> out(grid.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = static_cast<double>(grid[i]) / 255.0;
    }
    return SaliencyMap(grid.width(), grid.height(), std::move(out));
}

}  // namespace sodcal
