#include "sodcal/bds.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace sodcal::bds {
namespace {

std::size_t clamp_index(std::ptrdiff_t i, std::size_t n) {
    if (i < 0) return 0;
    if (static_cast<std::size_t>(i) >= n) return n - 1;
    return static_cast<std::size_t>(i);
}

// Running max over a (2r+1) window along rows then columns, clipped at the
// borders (no padding: out-of-image pixels are simply absent).
std::vector<unsigned char> dilate(const std::vector<unsigned char>& in, std::size_t w,
                                  std::size_t h, int r) {
    std::vector<unsigned char> tmp(in.size(), 0);
    std::vector<unsigned char> out(in.size(), 0);
    const auto rr = static_cast<std::ptrdiff_t>(r);
    for (std::size_t y = 0; y < h; ++y) {
        for (std::size_t x = 0; x < w; ++x) {
            const auto lo = std::max<std::ptrdiff_t>(0, static_cast<std::ptrdiff_t>(x) - rr);
            const auto hi = std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(w) - 1,
                                                     static_cast<std::ptrdiff_t>(x) + rr);
            unsigned char m = 0;
            for (auto k = lo; k <= hi && !m; ++k) m = in[y * w + static_cast<std::size_t>(k)];
            tmp[y * w + x] = m;
        }
    }
    for (std::size_t y = 0; y < h; ++y) {
        const auto lo = std::max<std::ptrdiff_t>(0, static_cast<std::ptrdiff_t>(y) - rr);
        const auto hi = std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(h) - 1,
                                                 static_cast<std::ptrdiff_t>(y) + rr);
        for (std::size_t x = 0; x < w; ++x) {
            unsigned char m = 0;
            for (auto k = lo; k <= hi && !m; ++k) m = tmp[static_cast<std::size_t>(k) * w + x];
            out[y * w + x] = m;
        }
    }
    return out;
}

}  // namespace

double GaussianKernel::weight(int dx, int dy) const noexcept {
    const auto r = static_cast<int>(radius_);
    return weights_[static_cast<std::size_t>(dy + r) * side() + static_cast<std::size_t>(dx + r)];
}

GaussianKernel gaussian_kernel(double sigma) {
    if (!(sigma > 0.0 && sigma <= kMaxSigma)) {
        throw DomainError("gaussian_kernel: sigma " + std::to_string(sigma) +
                          " outside (0, 5] (kernel size outside supported range)");
    }
    GaussianKernel k;
    k.sigma_ = sigma;
    k.radius_ = static_cast<std::size_t>(std::ceil(3.0 * sigma));
    const auto r = static_cast<int>(k.radius_);
    const std::size_t n = k.side();

    // Pairs are summed from the tails inward so profile[r+d] == profile[r-d]
    // and the normalizer is independent of summation direction.
    std::vector<long double> raw(n);
    long double total = 1.0L;
    raw[static_cast<std::size_t>(r)] = 1.0L;
    for (int d = r; d >= 1; --d) {
        const long double v = std::exp(-static_cast<long double>(d) * d / (2.0L * sigma * sigma));
        raw[static_cast<std::size_t>(r + d)] = v;
        raw[static_cast<std::size_t>(r - d)] = v;
        total += 2.0L * v;
    }
    k.profile_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        k.profile_[i] = static_cast<double>(raw[i] / total);
    }

    k.weights_.resize(n * n);
    for (std::size_t y = 0; y < n; ++y) {
        for (std::size_t x = 0; x < n; ++x) {
            k.weights_[y * n + x] = k.profile_[y] * k.profile_[x];
        }
    }
    return k;
}

SoftLabelMap smooth_label(const BinaryMask& mask, double sigma) {
    const GaussianKernel kernel = gaussian_kernel(sigma);
    const std::size_t w = mask.width();
    const std::size_t h = mask.height();
    const auto r = static_cast<std::ptrdiff_t>(kernel.radius());
    const auto profile = kernel.profile();

    // Clamp-to-edge padding factorizes per axis, so the 2-D convolution with
    // the outer-product kernel equals two 1-D passes.
    std::vector<double> tmp(w * h);
    for (std::size_t y = 0; y < h; ++y) {
        for (std::size_t x = 0; x < w; ++x) {
            double acc = 0.0;
            for (std::ptrdiff_t d = -r; d <= r; ++d) {
                acc += profile[static_cast<std::size_t>(d + r)] *
                       mask(clamp_index(static_cast<std::ptrdiff_t>(x) + d, w), y);
            }
            tmp[y * w + x] = acc;
        }
    }
    std::vector<double> out(w * h);
    for (std::size_t y = 0; y < h; ++y) {
        for (std::size_t x = 0; x < w; ++x) {
            double acc = 0.0;
            for (std::ptrdiff_t d = -r; d <= r; ++d) {
                acc += profile[static_cast<std::size_t>(d + r)] *
                       tmp[clamp_index(static_cast<std::ptrdiff_t>(y) + d, h) * w + x];
            }
            // Normalization leaves rounding residue of a few ulps around 0 and 1.
            out[y * w + x] = std::clamp(acc, 0.0, 1.0);
        }
    }
    return SoftLabelMap(w, h, std::move(out));
}

std::vector<SoftLabelMap> augment_labels(const BinaryMask& mask, std::span<const double> sigmas) {
    if (sigmas.empty()) {
        throw ArgumentError("augment_labels: sigma list is empty");
    }
    for (double s : sigmas) {
        (void)gaussian_kernel(s);  // validate the whole list before doing any work
    }
    std::vector<SoftLabelMap> out;
    out.reserve(sigmas.size());
    for (double s : sigmas) out.push_back(smooth_label(mask, s));
    return out;
}

BinaryMask boundary_band(const BinaryMask& mask, int radius) {
    if (radius < 1) {
        throw ArgumentError("boundary_band: radius must be >= 1");
    }
    const std::size_t w = mask.width();
    const std::size_t h = mask.height();
    std::vector<unsigned char> fg(w * h);
    std::vector<unsigned char> bg(w * h);
    for (std::size_t i = 0; i < w * h; ++i) {
        fg[i] = mask[i] == 1.0;
        bg[i] = !fg[i];
    }
    const auto near_fg = dilate(fg, w, h, radius);
    const auto near_bg = dilate(bg, w, h, radius);
    std::vector<double> out(w * h);
    for (std::size_t i = 0; i < w * h; ++i) {
        out[i] = (fg[i] ? near_bg[i] : near_fg[i]) ? 1.0 : 0.0;
    }
    return BinaryMask(w, h, std::move(out));
}

SoftLabelMap uniform_smooth_label(const BinaryMask& mask, int radius, double value) {
    if (!(value >= 0.0 && value <= 1.0)) {
        throw DomainError("uniform_smooth_label: value outside [0,1]");
    }
    const BinaryMask band = boundary_band(mask, radius);
    std::vector<double> out(mask.values().begin(), mask.values().end());
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (band[i] == 1.0) out[i] = value;
    }
    return SoftLabelMap(mask.width(), mask.height(), std::move(out));
}

std::vector<double> default_sigmas() { return {0.5, 1.0, 2.0, 3.0, 4.0, 5.0}; }

}  // namespace sodcal::bds
