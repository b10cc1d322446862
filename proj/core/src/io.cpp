#include "sodcal/io.hpp"

#include <bit>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include "json.hpp"

namespace sodcal::io {
namespace {

using Json = nlohmann::ordered_json;

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(std::span<const std::uint8_t> in, std::size_t offset) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(in[offset + i]) << (8 * i);
    return v;
}

std::uint64_t get_u64(std::span<const std::uint8_t> in, std::size_t offset) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(in[offset + i]) << (8 * i);
    return v;
}

void write_bytes(const fs::path& path, std::span<const std::uint8_t> bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("failed writing " + path.string());
}

// Minimal PNM header tokenizer: whitespace-separated tokens, '#' comments.
class HeaderReader {
public:
    HeaderReader(std::span<const std::uint8_t> bytes, const fs::path& path)
        : bytes_(bytes), path_(path) {}

    std::string token() {
        skip_space_and_comments();
        std::string t;
        while (pos_ < bytes_.size() && !std::isspace(bytes_[pos_]) && bytes_[pos_] != '#') {
            t.push_back(static_cast<char>(bytes_[pos_++]));
        }
        if (t.empty()) fail("truncated header");
        return t;
    }

    std::size_t number() {
        const std::string t = token();
        std::size_t v = 0;
        for (char c : t) {
            if (!std::isdigit(static_cast<unsigned char>(c))) fail("non-numeric header field");
            v = v * 10 + static_cast<std::size_t>(c - '0');
            if (v > (1u << 30)) fail("header field too large");
        }
        return v;
    }

    // Exactly one whitespace byte separates the header from the raster.
    std::size_t raster_offset() {
        if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_])) fail("missing raster separator");
        return pos_ + 1;
    }

    [[noreturn]] void fail(const std::string& what) const {
        throw FormatError(path_.string() + ": " + what);
    }

private:
    void skip_space_and_comments() {
        while (pos_ < bytes_.size()) {
            if (std::isspace(bytes_[pos_])) {
                ++pos_;
            } else if (bytes_[pos_] == '#') {
                while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
            } else {
                break;
            }
        }
    }

    std::span<const std::uint8_t> bytes_;
    const fs::path& path_;
    std::size_t pos_ = 0;
};

Json optional_number(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

std::optional<double> read_optional(const Json& j) {
    if (j.is_null()) return std::nullopt;
    return j.get<double>();
}

}  // namespace

std::vector<std::uint8_t> read_bytes(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), {});
}

void write_text(const fs::path& path, const std::string& text) {
    write_bytes(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

ByteGrid read_pgm(const fs::path& path) {
    const auto bytes = read_bytes(path);
    HeaderReader header(bytes, path);
    if (header.token() != "P5") header.fail("not a binary PGM (P5)");
    const std::size_t width = header.number();
    const std::size_t height = header.number();
    const std::size_t maxval = header.number();
    if (width == 0 || height == 0) header.fail("zero dimension");
    if (maxval != 255) header.fail("maxval must be 255");
    const std::size_t offset = header.raster_offset();
    if (bytes.size() - std::min(offset, bytes.size()) < width * height) header.fail("truncated raster");
    std::vector<std::uint8_t> data(bytes.begin() + static_cast<std::ptrdiff_t>(offset),
                                   bytes.begin() + static_cast<std::ptrdiff_t>(offset + width * height));
    return ByteGrid(width, height, std::move(data));
}

void write_pgm(const fs::path& path, const ByteGrid& grid) {
    const std::string header =
        "P5\n" + std::to_string(grid.width()) + " " + std::to_string(grid.height()) + "\n255\n";
    std::vector<std::uint8_t> bytes(header.begin(), header.end());
    bytes.insert(bytes.end(), grid.values().begin(), grid.values().end());
    write_bytes(path, bytes);
}

BinaryMask read_mask_pgm(const fs::path& path) {
    const ByteGrid grid = read_pgm(path);
    std::vector<double> values(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (grid[i] != 0 && grid[i] != 255) {
            throw ValidationError(path.string() + ": mask value " + std::to_string(grid[i]) +
                                  " is neither 0 nor 255");
        }
        values[i] = grid[i] == 255 ? 1.0 : 0.0;
    }
    return BinaryMask(grid.width(), grid.height(), std::move(values));
}

void write_mask_pgm(const fs::path& path, const BinaryMask& mask) {
    std::vector<std::uint8_t> data(mask.size());
    for (std::size_t i = 0; i < mask.size(); ++i) data[i] = mask[i] == 1.0 ? 255 : 0;
    write_pgm(path, ByteGrid(mask.width(), mask.height(), std::move(data)));
}

SaliencyMap read_saliency_pgm(const fs::path& path) { return dequantize_u8(read_pgm(path)); }

void write_saliency_pgm(const fs::path& path, const SaliencyMap& map) {
    write_pgm(path, quantize_u8(map));
}

FloatImage read_dmap(const fs::path& path) {
    const auto bytes = read_bytes(path);
    if (bytes.size() < kDmapHeaderBytes || std::memcmp(bytes.data(), "DMAP", 4) != 0) {
        throw FormatError(path.string() + ": bad DMAP magic");
    }
    FloatImage img;
    img.width = get_u32(bytes, 4);
    img.height = get_u32(bytes, 8);
    img.channels = get_u32(bytes, 12);
    if (img.width == 0 || img.height == 0 || img.channels == 0) {
        throw FormatError(path.string() + ": zero DMAP dimension");
    }
    const std::uint64_t plane = static_cast<std::uint64_t>(img.width) * img.height;
    const std::uint64_t payload = bytes.size() - kDmapHeaderBytes;
    if (plane > payload / 4 / img.channels || plane * img.channels * 4 != payload) {
        throw FormatError(path.string() + ": DMAP payload size does not match header");
    }
    img.data.resize(static_cast<std::size_t>(plane * img.channels));
    for (std::size_t i = 0; i < img.data.size(); ++i) {
        const float v = std::bit_cast<float>(get_u32(bytes, kDmapHeaderBytes + 4 * i));
        if (!std::isfinite(v)) throw FormatError(path.string() + ": non-finite value in DMAP payload");
        img.data[i] = v;
    }
    return img;
}

void write_dmap(const fs::path& path, const FloatImage& image) {
    if (image.data.size() != static_cast<std::size_t>(image.width) * image.height * image.channels) {
        throw ArgumentError("write_dmap: data length does not match dimensions");
    }
    std::vector<std::uint8_t> bytes = {'D', 'M', 'A', 'P'};
    bytes.reserve(kDmapHeaderBytes + 4 * image.data.size());
    put_u32(bytes, image.width);
    put_u32(bytes, image.height);
    put_u32(bytes, image.channels);
    for (float v : image.data) put_u32(bytes, std::bit_cast<std::uint32_t>(v));
    write_bytes(path, bytes);
}

FloatImage pack_channels(std::span<const PixelGrid> channels) {
    if (channels.empty()) throw ArgumentError("pack_channels: no channels");
    const PixelGrid& first = channels.front();
    FloatImage img;
    img.width = static_cast<std::uint32_t>(first.width());
    img.height = static_cast<std::uint32_t>(first.height());
    img.channels = static_cast<std::uint32_t>(channels.size());
    img.data.resize(first.size() * channels.size());
    for (std::size_t c = 0; c < channels.size(); ++c) {
        if (!channels[c].same_shape(first)) throw ArgumentError("pack_channels: size mismatch");
        for (std::size_t p = 0; p < first.size(); ++p) {
            img.data[p * channels.size() + c] = static_cast<float>(channels[c][p]);
        }
    }
    return img;
}

std::vector<PixelGrid> unpack_channels(const FloatImage& image) {
    const std::size_t n = static_cast<std::size_t>(image.width) * image.height;
    std::vector<PixelGrid> out;
    out.reserve(image.channels);
    for (std::size_t c = 0; c < image.channels; ++c) {
        std::vector<double> v(n);
        for (std::size_t p = 0; p < n; ++p) v[p] = image.data[p * image.channels + c];
        out.emplace_back(image.width, image.height, std::move(v));
    }
    return out;
}

FloatImage to_float_image(const RgbImage& image) {
    FloatImage img;
    img.width = static_cast<std::uint32_t>(image.width());
    img.height = static_cast<std::uint32_t>(image.height());
    img.channels = 3;
    img.data.assign(image.values().begin(), image.values().end());
    return img;
}

RgbImage to_rgb_image(const FloatImage& image) {
    if (image.channels != 3) {
        throw FormatError("expected a 3-channel image, got " + std::to_string(image.channels));
    }
    std::vector<double> v(image.data.begin(), image.data.end());
    for (double x : v) {
        if (!(x >= 0.0 && x <= 1.0)) throw ValidationError("image value outside [0,1]");
    }
    return RgbImage(image.width, image.height, std::move(v));
}

void save_model(const fs::path& path, const net::MHeadsModel& model) {
    std::vector<std::uint8_t> bytes = {'M', 'H', 'S', 'D'};
    bytes.reserve(kModelHeaderBytes + 8 * model.parameters().size());
    put_u32(bytes, kModelVersion);
    put_u32(bytes, static_cast<std::uint32_t>(model.head_count()));
    put_u32(bytes, static_cast<std::uint32_t>(net::kChannels));
    for (double p : model.parameters()) put_u64(bytes, std::bit_cast<std::uint64_t>(p));
    write_bytes(path, bytes);
}

net::MHeadsModel load_model(const fs::path& path) {
    const auto bytes = read_bytes(path);
    if (bytes.size() < kModelHeaderBytes || std::memcmp(bytes.data(), "MHSD", 4) != 0) {
        throw FormatError(path.string() + ": bad model magic");
    }
    const std::uint32_t version = get_u32(bytes, 4);
    const std::uint32_t heads = get_u32(bytes, 8);
    const std::uint32_t channels = get_u32(bytes, 12);
    if (version != kModelVersion) {
        throw FormatError(path.string() + ": unsupported model version " + std::to_string(version));
    }
    if (channels != net::kChannels) {
        throw FormatError(path.string() + ": unsupported channel count " + std::to_string(channels));
    }
    if (heads < 2 || heads > (1u << 20)) {
        throw FormatError(path.string() + ": invalid head count " + std::to_string(heads));
    }
    const std::size_t count = net::parameter_count(heads);
    if (bytes.size() - kModelHeaderBytes != 8 * count) {
        throw FormatError(path.string() + ": model payload size does not match head count");
    }
    std::vector<double> params(count);
    for (std::size_t i = 0; i < count; ++i) {
        params[i] = std::bit_cast<double>(get_u64(bytes, kModelHeaderBytes + 8 * i));
        if (!std::isfinite(params[i])) throw FormatError(path.string() + ": non-finite parameter");
    }
    return net::MHeadsModel(heads, std::move(params));
}

std::string report_json(const EvaluationReport& report) {
    Json j;
    j["dataset"] = {{"mae", report.mae},
                    {"max_fbeta", report.max_fbeta},
                    {"mean_fbeta", report.mean_fbeta},
                    {"calibration_C", report.calibration}};
    Json per_image = Json::array();
    for (const auto& s : report.per_image) {
        per_image.push_back({{"id", s.id},
                             {"mae", s.mae},
                             {"max_fbeta", optional_number(s.max_fbeta)},
                             {"C", s.calibration}});
    }
    j["per_image"] = std::move(per_image);
    Json bins = Json::array();
    for (const auto& b : report.bins) {
        bins.push_back({{"index", b.index},
                        {"lo", calib::bin_lower(b.index)},
                        {"hi", calib::bin_upper(b.index)},
                        {"count", b.count},
                        {"conf", optional_number(b.conf)},
                        {"macc", optional_number(b.macc)}});
    }
    j["bins"] = std::move(bins);
    return j.dump(2) + "\n";
}

void write_report(const fs::path& path, const EvaluationReport& report) {
    write_text(path, report_json(report));
}

EvaluationReport read_report(const fs::path& path) {
    const auto bytes = read_bytes(path);
    Json j;
    try {
        j = Json::parse(bytes.begin(), bytes.end());
        EvaluationReport r;
        const Json& d = j.at("dataset");
        r.mae = d.at("mae").get<double>();
        r.max_fbeta = d.at("max_fbeta").get<double>();
        r.mean_fbeta = d.at("mean_fbeta").get<double>();
        r.calibration = d.at("calibration_C").get<double>();
        for (const Json& e : j.at("per_image")) {
            r.per_image.push_back({e.at("id").get<std::string>(), e.at("mae").get<double>(),
                                   read_optional(e.at("max_fbeta")), e.at("C").get<double>()});
        }
        const Json& bins = j.at("bins");
        if (bins.size() != calib::kBinCount) throw FormatError(path.string() + ": expected 12 bins");
        for (std::size_t m = 0; m < calib::kBinCount; ++m) {
            const Json& b = bins[m];
            r.bins[m] = {b.at("index").get<std::size_t>(), b.at("count").get<std::size_t>(),
                         read_optional(b.at("conf")), read_optional(b.at("macc"))};
        }
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

std::string history_json(const net::TrainHistory& history) {
    Json epochs = Json::array();
    for (std::size_t i = 0; i < history.epochs.size(); ++i) {
        const auto& e = history.epochs[i];
        Json rec = {{"epoch", i + 1}, {"mean_loss", e.mean_loss}};
        if (e.eval) {
            rec["eval"] = {{"mae", e.eval->mae},
                           {"max_fbeta", e.eval->max_f},
                           {"calibration_C", e.eval->calibration}};
        } else {
            rec["eval"] = nullptr;
        }
        epochs.push_back(std::move(rec));
    }
    Json j;
    j["epochs"] = std::move(epochs);
    return j.dump(2) + "\n";
}

void write_history(const fs::path& path, const net::TrainHistory& history) {
    write_text(path, history_json(history));
}

}  // namespace sodcal::io
