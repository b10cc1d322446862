#include "cli.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "sodcal/bds.hpp"
#include "sodcal/calib.hpp"
#include "sodcal/io.hpp"
#include "sodcal/metrics.hpp"
#include "sodcal/net.hpp"
#include "sodcal/neumaier.hpp"
#include "sodcal/synth.hpp"
#include "sodcal/uats.hpp"

namespace sodcal::cli {
namespace {

namespace fs = std::filesystem;

// Thrown for flag combinations CLI11 cannot express (e.g. a mode needing a file).
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class NumericFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::string format_g(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

std::vector<double> parse_csv(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw UsageError("not a number in list: '" + item + "'");
        }
    }
    if (out.empty()) throw UsageError("empty list");
    return out;
}

// Files with `extension` in `dir`, sorted by name.
std::vector<fs::path> list_files(const fs::path& dir, const std::string& extension) {
    if (!fs::is_directory(dir)) throw IoError("not a directory: " + dir.string());
    std::vector<fs::path> out;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == extension) {
            out.push_back(entry.path());
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

// Pairing key: the file stem without a leading role prefix, so that
// GT_0001.pgm, PRED_0001.pgm and IMG_0001.dmap all map to "0001".
std::string pairing_key(const fs::path& p) {
    std::string stem = p.stem().string();
    for (const char* prefix : {"GT_", "PRED_", "IMG_"}) {
        const std::string_view pre(prefix);
        if (stem.starts_with(pre)) return stem.substr(pre.size());
    }
    return stem;
}

std::map<std::string, fs::path> keyed(const std::vector<fs::path>& files) {
    std::map<std::string, fs::path> out;
    for (const auto& f : files) {
        if (!out.emplace(pairing_key(f), f).second) {
            throw FormatError("two files share the pairing key '" + pairing_key(f) + "' in " +
                              f.parent_path().string());
        }
    }
    return out;
}

std::vector<LogitMap> read_logits(const fs::path& path) {
    std::vector<LogitMap> out;
    for (auto& g : io::unpack_channels(io::read_dmap(path))) out.emplace_back(std::move(g));
    return out;
}

// --- gen-synth --------------------------------------------------------------

struct GenSynthArgs {
    std::string out;
    std::size_t count = 200;
    std::size_t size = 48;
    std::uint64_t seed = 0;
    double noise = 0.05;
    double gap = 0.4;
};

void gen_synth(const GenSynthArgs& a, std::ostream& out) {
    synth::SynthConfig cfg;
    cfg.count = a.count;
    cfg.size = a.size;
    cfg.seed = a.seed;
    cfg.noise_sigma = a.noise;
    cfg.min_color_gap = a.gap;
    const auto samples = synth::generate_dataset(cfg);
    fs::create_directories(a.out);
    for (const auto& s : samples) {
        io::write_dmap(fs::path(a.out) / ("IMG_" + s.id + ".dmap"), io::to_float_image(s.image));
        io::write_mask_pgm(fs::path(a.out) / ("GT_" + s.id + ".pgm"), s.mask);
    }
    out << "wrote " << samples.size() << " samples to " << a.out << "\n";
}

// --- bds ----------------------------------------------------------------------

void write_soft_label(const fs::path& path, const SoftLabelMap& label) {
    const PixelGrid g = label.grid();
    io::write_dmap(path, io::pack_channels(std::span(&g, 1)));
}

// --- train --------------------------------------------------------------------

struct TrainArgs {
    std::string data;
    std::string eval_data;
    std::size_t heads = net::kDefaultHeads;
    std::size_t epochs = 20;
    double lr = 0.05;
    double momentum = 0.9;
    double alpha = 1.0;
    std::string uats = "off";
    std::string labels = "binary";
    std::string sigmas;
    int radius = bds::kDefaultUniformRadius;
    double value = bds::kDefaultUniformValue;
    std::uint64_t seed = 0;
    std::string out;
    std::string history;
};

struct LoadedSample {
    std::string key;
    RgbImage image;
    BinaryMask mask;
};

std::vector<LoadedSample> load_samples(const fs::path& dir) {
    const auto images = keyed(list_files(dir, ".dmap"));
    const auto masks = keyed(list_files(dir, ".pgm"));
    std::vector<LoadedSample> out;
    for (const auto& [key, image_path] : images) {
        const auto it = masks.find(key);
        if (it == masks.end()) throw FormatError("no ground truth for " + image_path.string());
        RgbImage image = io::to_rgb_image(io::read_dmap(image_path));
        BinaryMask mask = io::read_mask_pgm(it->second);
        if (image.width() != mask.width() || image.height() != mask.height()) {
            throw FormatError("image and mask sizes differ for " + image_path.string());
        }
        out.push_back({key, std::move(image), std::move(mask)});
    }
    if (out.empty()) throw FormatError("no IMG_*.dmap samples in " + dir.string());
    return out;
}

void train_cmd(const TrainArgs& a, std::ostream& out) {
    net::TrainConfig cfg;
    cfg.learning_rate = a.lr;
    cfg.momentum = a.momentum;
    cfg.epochs = a.epochs;
    cfg.alpha = uats::Alpha(a.alpha);
    cfg.uats_enabled = a.uats == "on";
    cfg.seed = a.seed;
    try {
        cfg.validate();
    } catch (const ArgumentError& e) {
        throw UsageError(e.what());
    }
    if (a.heads < 2) throw UsageError("--heads must be >= 2");
    const std::vector<double> sigmas = a.sigmas.empty() ? bds::default_sigmas() : parse_csv(a.sigmas);
    if (a.labels == "bds") {
        for (double s : sigmas) (void)bds::gaussian_kernel(s);
    }

    std::vector<net::TrainImage> train_set;
    for (auto& s : load_samples(a.data)) {
        net::TrainImage t{std::move(s.image), {}};
        if (a.labels == "bds") {
            t.labels = bds::augment_labels(s.mask, sigmas);
        } else if (a.labels == "uniform") {
            t.labels.push_back(bds::uniform_smooth_label(s.mask, a.radius, a.value));
        } else {
            t.labels.push_back(to_soft_label(s.mask));
        }
        train_set.push_back(std::move(t));
    }
    std::vector<net::EvalImage> eval_set;
    if (!a.eval_data.empty()) {
        for (auto& s : load_samples(a.eval_data)) {
            eval_set.push_back({std::move(s.image), std::move(s.mask)});
        }
    }

    auto result = net::train(net::init_model(a.heads, a.seed), train_set, eval_set, cfg);
    io::save_model(a.out, result.model);
    if (!a.history.empty()) io::write_history(a.history, result.history);
    const auto& last = result.history.epochs.back();
    out << "trained " << a.epochs << " epochs, final mean loss " << last.mean_loss;
    if (last.eval) {
        out << ", eval mae " << last.eval->mae << ", max F " << last.eval->max_f << ", C "
            << last.eval->calibration;
    }
    out << "\n";
}

// --- predict --------------------------------------------------------------------

struct PredictArgs {
    std::string model;
    std::string image;
    std::string uats = "off";
    double alpha = 1.0;
    std::string out_pred;
    std::string out_uncertainty;
    std::string out_logits;
};

void predict_cmd(const PredictArgs& a) {
    const net::MHeadsModel model = io::load_model(a.model);
    const RgbImage image = io::to_rgb_image(io::read_dmap(a.image));
    const auto logits = net::forward(model, image);
    const net::Prediction p = net::predict_from_logits(logits, a.uats == "on", uats::Alpha(a.alpha));
    io::write_saliency_pgm(a.out_pred, p.saliency);
    if (!a.out_uncertainty.empty()) {
        const PixelGrid g = p.uncertainty.grid();
        io::write_dmap(a.out_uncertainty, io::pack_channels(std::span(&g, 1)));
    }
    if (!a.out_logits.empty()) {
        std::vector<PixelGrid> grids;
        for (const auto& z : logits) grids.push_back(z.grid());
        io::write_dmap(a.out_logits, io::pack_channels(grids));
    }
}

// --- calibrate post -------------------------------------------------------------

struct PostArgs {
    std::string logits;
    std::string mode;
    std::optional<double> temperature;
    std::string image;
    std::string uncertainty;
    double alpha = 1.0;
    std::string out;
};

void calibrate_post(const PostArgs& a) {
    const auto logits = read_logits(a.logits);
    const std::size_t w = logits.front().width();
    const std::size_t h = logits.front().height();

    std::optional<TemperatureMap> temperature;
    if (a.mode == "uniform") {
        if (!a.temperature) throw UsageError("--mode uniform requires --temperature");
        try {
            temperature = uats::uniform_temperature(w, h, *a.temperature);
        } catch (const ArgumentError& e) {
            throw UsageError(e.what());
        }
    } else if (a.mode == "edge") {
        if (a.image.empty()) throw UsageError("--mode edge requires --image");
        temperature = uats::edge_temperature(io::to_rgb_image(io::read_dmap(a.image)));
    } else {
        if (a.uncertainty.empty()) throw UsageError("--mode uncertainty requires --uncertainty");
        const auto grids = io::unpack_channels(io::read_dmap(a.uncertainty));
        if (grids.size() != 1) throw FormatError("uncertainty file must have one channel");
        temperature = uats::temperature_from_uncertainty(UncertaintyMap(grids.front()),
                                                         uats::Alpha(a.alpha));
    }
    if (temperature->width() != w || temperature->height() != h) {
        throw FormatError("temperature and logit sizes differ");
    }

    std::vector<double> sum(w * h, 0.0);
    for (const auto& z : logits) {
        const SaliencyMap s = uats::relaxed_sigmoid(z, *temperature);
        for (std::size_t p = 0; p < sum.size(); ++p) sum[p] += s[p];
    }
    const auto count = static_cast<double>(logits.size());
    for (double& v : sum) v = std::clamp(v / count, 0.0, 1.0);
    io::write_saliency_pgm(a.out, SaliencyMap(w, h, std::move(sum)));
}

// --- eval -----------------------------------------------------------------------

struct EvalArgs {
    std::string pred_dir;
    std::string gt_dir;
    double beta2 = metrics::kDefaultBeta2;
    std::string out;
    std::string reliability;
    std::string reliability_mean;
};

void eval_cmd(const EvalArgs& a, std::ostream& out) {
    if (!(a.beta2 > 0.0)) throw UsageError("--beta2 must be positive");
    const auto preds = keyed(list_files(a.pred_dir, ".pgm"));
    const auto gts = keyed(list_files(a.gt_dir, ".pgm"));
    for (const auto& [key, path] : preds) {
        if (!gts.contains(key)) throw FormatError("no ground truth matches " + path.string());
    }
    for (const auto& [key, path] : gts) {
        if (!preds.contains(key)) throw FormatError("no prediction matches " + path.string());
    }
    if (preds.empty()) throw FormatError("no .pgm predictions in " + a.pred_dir);

    std::vector<std::string> ids;
    std::vector<SaliencyMap> predictions;
    std::vector<BinaryMask> truths;
    for (const auto& [key, path] : preds) {
        ids.push_back(key);
        predictions.push_back(io::read_saliency_pgm(path));
        truths.push_back(io::read_mask_pgm(gts.at(key)));
        if (!predictions.back().same_shape(truths.back())) {
            throw FormatError("prediction and ground truth sizes differ for " + key);
        }
    }

    io::EvaluationReport report;
    std::vector<metrics::FCurve> curves;
    std::vector<calib::EvalPair> pairs;
    NeumaierSum mae_sum;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        io::ImageScores scores;
        scores.id = ids[i];
        scores.mae = metrics::mae(predictions[i], truths[i]);
        mae_sum.add(scores.mae);
        try {
            curves.push_back(metrics::fbeta_curve(predictions[i], truths[i], a.beta2));
            scores.max_fbeta = curves.back().max_f;
        } catch (const DegenerateGroundTruthError&) {
        }
        report.per_image.push_back(scores);
        pairs.push_back({ids[i], predictions[i], truths[i]});
    }
    const calib::CalibrationReport cal = calib::dataset_calibration(pairs);
    for (std::size_t i = 0; i < ids.size(); ++i) {
        report.per_image[i].calibration = cal.per_image[i].value;
    }
    const metrics::FCurve mean_curve = metrics::average_curves(curves, a.beta2);
    report.mae = mae_sum.value() / static_cast<double>(ids.size());
    report.max_fbeta = mean_curve.max_f;
    report.mean_fbeta = mean_curve.mean_f;
    report.calibration = cal.dataset;
    report.bins = cal.bins;

    io::write_report(a.out, report);
    if (!a.reliability.empty()) io::write_text(a.reliability, calib::reliability_csv(cal.bins));
    if (!a.reliability_mean.empty()) {
        io::write_text(a.reliability_mean, calib::reliability_csv(cal.mean_bins));
    }
    out << "images " << ids.size() << "  mae " << report.mae << "  maxF " << report.max_fbeta
        << "  meanF " << report.mean_fbeta << "  C " << report.calibration << "\n";
}

// --- gradcheck --------------------------------------------------------------------

struct GradcheckArgs {
    std::uint64_t seed = 0;
    std::string uats = "off";
    std::size_t heads = net::kDefaultHeads;
    std::size_t size = 16;
};

void gradcheck_cmd(const GradcheckArgs& a, std::ostream& out) {
    if (a.heads < 2) throw UsageError("--heads must be >= 2");
    if (a.size < 16 || a.size > net::kGradientCheckMaxSide) {
        throw UsageError("--size must be 16");
    }
    synth::SynthConfig sc;
    sc.size = a.size;
    sc.seed = a.seed;
    const auto [sample, next] = synth::generate_sample(sc, a.seed);
    (void)next;
    net::TrainConfig cfg;
    cfg.uats_enabled = a.uats == "on";
    cfg.seed = a.seed;
    const net::MHeadsModel model = net::init_model(a.heads, a.seed);
    const net::GradientCheckResult r =
        net::gradient_check(model, sample.image, to_soft_label(sample.mask), cfg);
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6e", r.max_relative_error);
    out << "max relative error " << buf << "\n";
    out << "parameters checked " << r.checked << ", skipped at ReLU kinks " << r.skipped << "\n";
    if (r.checked == 0) throw NumericFailure("gradient check failed: no parameter could be probed");
    if (!(r.max_relative_error < 1e-4)) {
        throw NumericFailure("gradient check failed: max relative error " + std::string(buf) +
                             " >= 1e-4");
    }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Calibrated salient object detection toolkit"};
    app.name("sodcal");
    app.require_subcommand(1);

    const auto on_off = CLI::IsMember({"on", "off"});

    GenSynthArgs gen;
    auto* gen_cmd = app.add_subcommand("gen-synth", "Generate a synthetic salient-shape dataset");
    gen_cmd->add_option("--out", gen.out, "Output directory")->required();
    gen_cmd->add_option("--count", gen.count, "Number of samples")->check(CLI::PositiveNumber);
    gen_cmd->add_option("--size", gen.size, "Image side length")->check(CLI::Range(16, 4096));
    gen_cmd->add_option("--seed", gen.seed, "PRNG seed");
    gen_cmd->add_option("--noise", gen.noise, "Per-channel noise sigma")->check(CLI::NonNegativeNumber);
    gen_cmd->add_option("--gap", gen.gap, "Minimum RGB distance between colors")
        ->check(CLI::NonNegativeNumber);

    auto* bds_cmd = app.add_subcommand("bds", "Boundary distribution smoothing of ground truth");
    bds_cmd->require_subcommand(1);
    std::string smooth_gt, smooth_out;
    double smooth_sigma = 1.0;
    auto* smooth = bds_cmd->add_subcommand("smooth", "Gaussian-smooth one mask");
    smooth->add_option("--gt", smooth_gt, "Mask PGM")->required();
    smooth->add_option("--sigma", smooth_sigma, "Kernel sigma in (0, 5]")->required();
    smooth->add_option("--out", smooth_out, "Output DMAP")->required();

    std::string aug_dir, aug_sigmas, aug_out;
    auto* augment = bds_cmd->add_subcommand("augment", "Smooth every mask at several scales");
    augment->add_option("--gt-dir", aug_dir, "Directory of mask PGMs")->required();
    augment->add_option("--sigmas", aug_sigmas, "Comma-separated sigmas");
    augment->add_option("--out-dir", aug_out, "Output directory")->required();

    std::string uni_gt, uni_out;
    int uni_radius = bds::kDefaultUniformRadius;
    double uni_value = bds::kDefaultUniformValue;
    auto* uniform = bds_cmd->add_subcommand("uniform", "Assign a uniform value along mask boundaries");
    uniform->add_option("--gt", uni_gt, "Mask PGM")->required();
    uniform->add_option("--radius", uni_radius, "Band radius (pixels)")->check(CLI::PositiveNumber);
    uniform->add_option("--value", uni_value, "Band value in [0,1]")->check(CLI::Range(0.0, 1.0));
    uniform->add_option("--out", uni_out, "Output DMAP")->required();

    TrainArgs tr;
    auto* train = app.add_subcommand("train", "Train an M-heads model");
    train->add_option("--data", tr.data, "Training directory (IMG_*.dmap, GT_*.pgm)")->required();
    train->add_option("--eval-data", tr.eval_data, "Held-out directory for per-epoch metrics");
    train->add_option("--heads", tr.heads, "Number of decoder heads");
    train->add_option("--epochs", tr.epochs, "Epochs")->check(CLI::PositiveNumber);
    train->add_option("--lr", tr.lr, "Learning rate");
    train->add_option("--momentum", tr.momentum, "SGD momentum");
    train->add_option("--alpha", tr.alpha, "UATS alpha")->check(CLI::NonNegativeNumber);
    train->add_option("--uats", tr.uats, "Uncertainty-aware temperature scaling")->check(on_off);
    train->add_option("--labels", tr.labels, "Training targets")
        ->check(CLI::IsMember({"binary", "bds", "uniform"}));
    train->add_option("--sigmas", tr.sigmas, "Comma-separated BDS sigmas");
    train->add_option("--radius", tr.radius, "Band radius for --labels uniform")->check(CLI::PositiveNumber);
    train->add_option("--value", tr.value, "Band value for --labels uniform")->check(CLI::Range(0.0, 1.0));
    train->add_option("--seed", tr.seed, "Seed for initialization and shuffling");
    train->add_option("--out", tr.out, "Output model file")->required();
    train->add_option("--history", tr.history, "Training history JSON");

    PredictArgs pr;
    auto* predict = app.add_subcommand("predict", "Predict a saliency map");
    predict->add_option("--model", pr.model, "Model file")->required();
    predict->add_option("--image", pr.image, "3-channel DMAP image")->required();
    predict->add_option("--uats", pr.uats, "Apply UATS at inference")->check(on_off);
    predict->add_option("--alpha", pr.alpha, "UATS alpha")->check(CLI::NonNegativeNumber);
    predict->add_option("--out-pred", pr.out_pred, "Output saliency PGM")->required();
    predict->add_option("--out-uncertainty", pr.out_uncertainty, "Output uncertainty DMAP");
    predict->add_option("--out-logits", pr.out_logits, "Output per-head logits DMAP");

    auto* calibrate = app.add_subcommand("calibrate", "Post-hoc temperature scaling");
    calibrate->require_subcommand(1);
    PostArgs po;
    auto* post = calibrate->add_subcommand("post", "Soften stored logits with a temperature map");
    post->add_option("--logits", po.logits, "Logits DMAP (one channel per head)")->required();
    post->add_option("--mode", po.mode, "Temperature source")
        ->required()
        ->check(CLI::IsMember({"uniform", "edge", "uncertainty"}));
    post->add_option("--temperature", po.temperature, "Uniform temperature (>= 1)");
    post->add_option("--image", po.image, "3-channel DMAP image (edge mode)");
    post->add_option("--uncertainty", po.uncertainty, "Uncertainty DMAP (uncertainty mode)");
    post->add_option("--alpha", po.alpha, "Alpha (uncertainty mode)")->check(CLI::NonNegativeNumber);
    post->add_option("--out", po.out, "Output saliency PGM")->required();

    EvalArgs ev;
    auto* eval = app.add_subcommand("eval", "Calibration measure, MAE and F-measure");
    eval->add_option("--pred-dir", ev.pred_dir, "Directory of prediction PGMs")->required();
    eval->add_option("--gt-dir", ev.gt_dir, "Directory of mask PGMs")->required();
    eval->add_option("--beta2", ev.beta2, "F-measure beta squared");
    eval->add_option("--out", ev.out, "Report JSON")->required();
    eval->add_option("--reliability", ev.reliability, "Pixel-pooled reliability CSV");
    eval->add_option("--reliability-mean", ev.reliability_mean, "Per-image averaged reliability CSV");

    GradcheckArgs gc;
    auto* gradcheck = app.add_subcommand("gradcheck", "Finite-difference gradient verification");
    gradcheck->add_option("--seed", gc.seed, "Seed for model and sample");
    gradcheck->add_option("--uats", gc.uats, "Check the UATS loss path")->check(on_off);
    gradcheck->add_option("--heads", gc.heads, "Number of decoder heads");

    std::vector<std::string> argv_store;
    argv_store.reserve(args.size() + 1);
    argv_store.push_back("sodcal");
    argv_store.insert(argv_store.end(), args.begin(), args.end());
    std::vector<char*> argv;
    for (auto& s : argv_store) argv.push_back(s.data());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsageError;
    }

    try {
        if (*gen_cmd) {
            gen_synth(gen, out);
        } else if (*smooth) {
            (void)bds::gaussian_kernel(smooth_sigma);
            write_soft_label(smooth_out, bds::smooth_label(io::read_mask_pgm(smooth_gt), smooth_sigma));
        } else if (*augment) {
            const std::vector<double> sigmas =
                aug_sigmas.empty() ? bds::default_sigmas() : parse_csv(aug_sigmas);
            for (double s : sigmas) (void)bds::gaussian_kernel(s);
            fs::create_directories(aug_out);
            const auto masks = list_files(aug_dir, ".pgm");
            for (const auto& path : masks) {
                const auto labels = bds::augment_labels(io::read_mask_pgm(path), sigmas);
                for (std::size_t k = 0; k < labels.size(); ++k) {
                    write_soft_label(fs::path(aug_out) /
                                         (path.stem().string() + "_s" + format_g(sigmas[k]) + ".dmap"),
                                     labels[k]);
                }
            }
            out << "smoothed " << masks.size() << " masks at " << sigmas.size() << " scales\n";
        } else if (*uniform) {
            write_soft_label(uni_out,
                             bds::uniform_smooth_label(io::read_mask_pgm(uni_gt), uni_radius, uni_value));
        } else if (*train) {
            train_cmd(tr, out);
        } else if (*predict) {
            predict_cmd(pr);
        } else if (*post) {
            calibrate_post(po);
        } else if (*eval) {
            eval_cmd(ev, out);
        } else if (*gradcheck) {
            gradcheck_cmd(gc, out);
        }
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << "\n" << app.help();
        return kUsageError;
    } catch (const DomainError& e) {
        err << "usage error: " << e.what() << "\n";
        return kUsageError;
    } catch (const NumericFailure& e) {
        err << e.what() << "\n";
        return kNumericFailure;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kDataError;
    } catch (const fs::filesystem_error& e) {
        err << "error: " << e.what() << "\n";
        return kDataError;
    }
    return kOk;
}

int run(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return run(args, std::cout, std::cerr);
}

}  // namespace sodcal::cli
