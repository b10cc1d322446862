#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "sodcal/maps.hpp"
#include "sodcal/splitmix64.hpp"

namespace sodcal {
namespace {

TEST(PixelGrid, RejectsLengthMismatch) {
    EXPECT_THROW(PixelGrid(3, 2, std::vector<double>(5)), ArgumentError);
    EXPECT_THROW(PixelGrid(0, 2, std::vector<double>{}), ArgumentError);
}

TEST(PixelGrid, RejectsNonFinite) {
    EXPECT_THROW(PixelGrid(1, 1, std::vector<double>{std::nan("")}), ValidationError);
    EXPECT_THROW(PixelGrid(1, 1, std::vector<double>{std::numeric_limits<double>::infinity()}),
                 ValidationError);
}

TEST(PixelGrid, RowMajorIndexing) {
    const PixelGrid g(3, 2, std::vector<double>{0, 1, 2, 3, 4, 5});
    EXPECT_EQ(g(2, 0), 2.0);
    EXPECT_EQ(g(0, 1), 3.0);
    EXPECT_EQ(g(2, 1), 5.0);
}

TEST(ConstrainedGrid, EnforcesRanges) {
    EXPECT_THROW(BinaryMask(2, 1, std::vector<double>{0.0, 0.5}), ValidationError);
    EXPECT_THROW(SaliencyMap(1, 1, std::vector<double>{1.01}), ValidationError);
    EXPECT_THROW(UncertaintyMap(1, 1, std::vector<double>{-0.1}), ValidationError);
    EXPECT_THROW(TemperatureMap(1, 1, std::vector<double>{0.99}), ValidationError);
    EXPECT_NO_THROW(TemperatureMap(1, 1, std::vector<double>{1.0}));
    EXPECT_NO_THROW(LogitMap(1, 2, std::vector<double>{-300.0, 300.0}));
}

TEST(RgbImage, ValidatesChannelsAndRange) {
    EXPECT_THROW(RgbImage(2, 2, std::vector<double>(11, 0.5)), ArgumentError);
    EXPECT_THROW(RgbImage(1, 1, std::vector<double>{0.0, 0.5, 1.5}), ValidationError);
    const RgbImage img(1, 2, std::vector<double>{0.1, 0.2, 0.3, 0.4, 0.5, 0.6});
    EXPECT_EQ(img(0, 1, 2), 0.6);
}

TEST(Quantize, EndpointsAndHalfStep) {
    const SaliencyMap m(3, 1, std::vector<double>{0.0, 1.0, 0.5});
    const ByteGrid q = quantize_u8(m);
    EXPECT_EQ(q[0], 0);
    EXPECT_EQ(q[1], 255);
    EXPECT_EQ(q[2], 128);  // round(127.5) rounds half up
}

TEST(Quantize, DequantizeEndpoints) {
    const SaliencyMap m = dequantize_u8(ByteGrid(2, 1, {0, 255}));
    EXPECT_EQ(m[0], 0.0);
    EXPECT_EQ(m[1], 1.0);
}

TEST(Quantize, IdentityOnByteGrid) {
    std::vector<std::uint8_t> all(256);
    for (int i = 0; i < 256; ++i) all[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(i);
    const ByteGrid g(16, 16, all);
    EXPECT_EQ(quantize_u8(dequantize_u8(g)), g);
}

TEST(Quantize, RoundTripWithinHalfStep) {
    SplitMix64 rng(42);
    std::vector<double> v(4096);
    for (double& x : v) x = rng.uniform();
    v[0] = 0.0;
    v[1] = 1.0;
    const SaliencyMap m(64, 64, v);
    const SaliencyMap back = dequantize_u8(quantize_u8(m));
    for (std::size_t i = 0; i < v.size(); ++i) {
        EXPECT_LE(std::abs(back[i] - m[i]), 1.0 / 510.0 + 1e-15) << i;
    }
}

}  // namespace
}  // namespace sodcal
