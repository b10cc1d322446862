#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sodcal/calib.hpp"
#include "sodcal/maps.hpp"
#include "sodcal/net.hpp"

namespace sodcal::io {

namespace fs = std::filesystem;

// --- PGM (P5, maxval 255) -------------------------------------------------

ByteGrid read_pgm(const fs::path& path);
void write_pgm(const fs::path& path, const ByteGrid& grid);

// Masks are stored as {0, 255}; any other value is a ValidationError.
BinaryMask read_mask_pgm(const fs::path& path);
void write_mask_pgm(const fs::path& path, const BinaryMask& mask);

// Saliency maps are stored quantized (round half up) and read back as v/255.
SaliencyMap read_saliency_pgm(const fs::path& path);
void write_saliency_pgm(const fs::path& path, const SaliencyMap& map);

// --- DMAP -------------------------------------------------------------------
//   "DMAP" | width u32 LE | height u32 LE | channels u32 LE |
//   width*height*channels float32 LE, row-major, channel-interleaved

inline constexpr std::size_t kDmapHeaderBytes = 16;

struct FloatImage {
    std::uint32_t width = 0;
    std::uint32_t height = 0;
    std::uint32_t channels = 0;
    std::vector<float> data;

    friend bool operator==(const FloatImage&, const FloatImage&) = default;
};

FloatImage read_dmap(const fs::path& path);
void write_dmap(const fs::path& path, const FloatImage& image);

// Channel-interleaved packing of same-sized grids (values narrowed to float).
FloatImage pack_channels(std::span<const PixelGrid> channels);
std::vector<PixelGrid> unpack_channels(const FloatImage& image);

FloatImage to_float_image(const RgbImage& image);
RgbImage to_rgb_image(const FloatImage& image);  // requires 3 channels in [0,1]

// --- Model (.mhsd) ------------------------------------------------------------
//   "MHSD" | version u32 LE = 1 | head_count u32 LE | channels u32 LE = 8 |
//   parameters as float64 LE in MHeadsModel order

inline constexpr std::uint32_t kModelVersion = 1;
inline constexpr std::size_t kModelHeaderBytes = 16;

void save_model(const fs::path& path, const net::MHeadsModel& model);
net::MHeadsModel load_model(const fs::path& path);

// --- Reports (JSON) -----------------------------------------------------------

struct ImageScores {
    std::string id;
    double mae = 0.0;
    std::optional<double> max_fbeta;  // absent for ground truth without foreground
    double calibration = 0.0;
};

struct EvaluationReport {
    double mae = 0.0;
    double max_fbeta = 0.0;
    double mean_fbeta = 0.0;
    double calibration = 0.0;
    std::vector<ImageScores> per_image;
    calib::BinTable bins;
};

// {"dataset": {"mae","max_fbeta","mean_fbeta","calibration_C"},
//  "per_image": [{"id","mae","max_fbeta","C"}],
//  "bins": [{"index","lo","hi","count","conf","macc"}]}
std::string report_json(const EvaluationReport& report);
void write_report(const fs::path& path, const EvaluationReport& report);
EvaluationReport read_report(const fs::path& path);

std::string history_json(const net::TrainHistory& history);
void write_history(const fs::path& path, const net::TrainHistory& history);

void write_text(const fs::path& path, const std::string& text);
std::vector<std::uint8_t> read_bytes(const fs::path& path);

}  // namespace sodcal::io
