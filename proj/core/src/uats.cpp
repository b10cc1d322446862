#include "sodcal/uats.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace sodcal::uats {

SaliencyMap sigmoid(const LogitMap& z) {
    std::vector<double> out(z.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = sigmoid(z[i]);
    return SaliencyMap(z.width(), z.height(), std::move(out));
}

SaliencyMap relaxed_sigmoid(const LogitMap& z, const TemperatureMap& temperature) {
    if (!z.same_shape(temperature)) {
        throw ArgumentError("relaxed_sigmoid: logit and temperature dimensions differ");
    }
    std::vector<double> out(z.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = sigmoid(z[i] / temperature[i]);
    return SaliencyMap(z.width(), z.height(), std::move(out));
}

TemperatureMap temperature_from_uncertainty(const UncertaintyMap& uncertainty, Alpha alpha) {
    std::vector<double> out(uncertainty.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = std::exp(alpha.value() * uncertainty[i]);
    }
    return TemperatureMap(uncertainty.width(), uncertainty.height(), std::move(out));
}

UncertaintyMap uncertainty_from_heads(std::span<const SaliencyMap> predictions) {
    if (predictions.size() < 2) {
        throw ArgumentError("uncertainty_from_heads: need at least 2 head predictions");
    }
    const SaliencyMap& first = predictions.front();
    for (const auto& p : predictions) {
        if (!p.same_shape(first)) {
            throw ArgumentError("uncertainty_from_heads: head predictions differ in size");
        }
    }
    const std::size_t m = predictions.size();
    const auto count = static_cast<double>(m);
    std::vector<double> column(m);
    std::vector<double> out(first.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        // Sorting the per-pixel values makes the result bit-identical under
        // any permutation of the heads.
        for (std::size_t k = 0; k < m; ++k) column[k] = predictions[k][i];
        std::sort(column.begin(), column.end());
        if (column.front() == column.back()) {
            out[i] = 0.0;
            continue;
        }
        double mean = 0.0;
        for (double v : column) mean += v;
        mean /= count;
        double var = 0.0;
        for (double v : column) var += (v - mean) * (v - mean);
        var /= count;
        out[i] = std::clamp(4.0 * var, 0.0, 1.0);
    }
    return UncertaintyMap(first.width(), first.height(), std::move(out));
}

PixelGrid edge_map(const RgbImage& image) {
    const std::size_t w = image.width();
    const std::size_t h = image.height();
    std::vector<double> lum(w * h);
    for (std::size_t y = 0; y < h; ++y) {
        for (std::size_t x = 0; x < w; ++x) {
            lum[y * w + x] =
                0.299 * image(x, y, 0) + 0.587 * image(x, y, 1) + 0.114 * image(x, y, 2);
        }
    }
    auto at = [&](std::ptrdiff_t x, std::ptrdiff_t y) {
        x = std::clamp<std::ptrdiff_t>(x, 0, static_cast<std::ptrdiff_t>(w) - 1);
        y = std::clamp<std::ptrdiff_t>(y, 0, static_cast<std::ptrdiff_t>(h) - 1);
        return lum[static_cast<std::size_t>(y) * w + static_cast<std::size_t>(x)];
    };
    std::vector<double> mag(w * h);
    double peak = 0.0;
    for (std::size_t yy = 0; yy < h; ++yy) {
        for (std::size_t xx = 0; xx < w; ++xx) {
            const auto x = static_cast<std::ptrdiff_t>(xx);
            const auto y = static_cast<std::ptrdiff_t>(yy);
            const double gx = (at(x + 1, y - 1) + 2.0 * at(x + 1, y) + at(x + 1, y + 1)) -
                              (at(x - 1, y - 1) + 2.0 * at(x - 1, y) + at(x - 1, y + 1));
            const double gy = (at(x - 1, y + 1) + 2.0 * at(x, y + 1) + at(x + 1, y + 1)) -
                              (at(x - 1, y - 1) + 2.0 * at(x, y - 1) + at(x + 1, y - 1));
            const double m = std::sqrt(gx * gx + gy * gy);
            mag[yy * w + xx] = m;
            peak = std::max(peak, m);
        }
    }
    if (peak > 0.0) {
        for (double& m : mag) m /= peak;
    } else {
        std::fill(mag.begin(), mag.end(), 0.0);
    }
    return PixelGrid(w, h, std::move(mag));
}

TemperatureMap edge_temperature(const RgbImage& image) {
    const PixelGrid e = edge_map(image);
    std::vector<double> out(e.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::exp(e[i]);
    return TemperatureMap(e.width(), e.height(), std::move(out));
}

TemperatureMap uniform_temperature(std::size_t width, std::size_t height, double t) {
    if (!(t >= 1.0) || !std::isfinite(t)) {
        throw ArgumentError("uniform_temperature: t must be >= 1, got " + std::to_string(t));
    }
    return TemperatureMap::filled(width, height, t);
}

SaliencyMap apply_uats(const LogitMap& z, const UncertaintyMap& uncertainty, Alpha alpha) {
    if (!z.same_shape(uncertainty)) {
        throw ArgumentError("apply_uats: logit and uncertainty dimensions differ");
    }
    return relaxed_sigmoid(z, temperature_from_uncertainty(uncertainty, alpha));
}

}  // namespace sodcal::uats
