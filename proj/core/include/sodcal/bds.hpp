#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "sodcal/maps.hpp"

namespace sodcal::bds {

inline constexpr double kMaxSigma = 5.0;

// Normalized, truncated isotropic Gaussian. The 2-D weights are the outer
// product of the 1-D profile, stored row-major over (2r+1)^2 taps.
class GaussianKernel {
public:
    double sigma() const noexcept { return sigma_; }
    std::size_t radius() const noexcept { return radius_; }
    std::size_t side() const noexcept { return 2 * radius_ + 1; }

    // Weight at offset (dx, dy), |dx|, |dy| <= radius.
    double weight(int dx, int dy) const noexcept;
    std::span<const double> weights() const& noexcept { return weights_; }
    std::span<const double> weights() const&& = delete;
    // Normalized 1-D profile; weights() == outer(profile, profile).
    std::span<const double> profile() const& noexcept { return profile_; }
    std::span<const double> profile() const&& = delete;

private:
    friend GaussianKernel gaussian_kernel(double sigma);
    GaussianKernel() = default;

    double sigma_ = 0.0;
    std::size_t radius_ = 0;
    std::vector<double> profile_;
    std::vector<double> weights_;
};

// sigma in (0, 5]; radius = ceil(3 sigma).
GaussianKernel gaussian_kernel(double sigma);

// Gaussian blur of a binary mask with clamp-to-edge padding.
SoftLabelMap smooth_label(const BinaryMask& mask, double sigma);

// One smoothed label per sigma, in order.
std::vector<SoftLabelMap> augment_labels(const BinaryMask& mask, std::span<const double> sigmas);

// 1 where the Chebyshev distance to the nearest opposite-valued pixel is <= radius.
BinaryMask boundary_band(const BinaryMask& mask, int radius);

// Pixels in boundary_band(mask, radius) become `value`; others stay binary.
SoftLabelMap uniform_smooth_label(const BinaryMask& mask, int radius, double value);

// Augmentation scales used when none are given.
std::vector<double> default_sigmas();

inline constexpr int kDefaultUniformRadius = 2;
inline constexpr double kDefaultUniformValue = 0.5;

}  // namespace sodcal::bds
