#include "sodcal/net.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "sodcal/calib.hpp"
#include "sodcal/metrics.hpp"
#include "sodcal/neumaier.hpp"
#include "sodcal/splitmix64.hpp"

namespace sodcal::net {
namespace {

constexpr std::uint64_t kShuffleStream = 0x5851F42D4C957F2DULL;

// Channel-planar activations: channel c, pixel p at [c * N + p].
struct Activations {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<double> input;   // 3 x N
    std::vector<double> hidden1; // 8 x N, post-ReLU
    std::vector<double> hidden2; // 8 x N, post-ReLU
    std::vector<double> logits;  // M x N

    std::size_t pixels() const { return width * height; }
};

struct Span2D {
    std::size_t lo;
    std::size_t hi;
};

// Output rows/cols for which the tap offset d stays inside [0, n).
Span2D valid_range(int d, std::size_t n) {
    const std::size_t lo = d < 0 ? static_cast<std::size_t>(-d) : 0;
    const std::size_t hi = d > 0 ? n - static_cast<std::size_t>(d) : n;
    return {lo, std::max(lo, hi)};
}

void conv3x3_forward(const std::vector<double>& in, std::size_t in_ch, std::size_t out_ch,
                     std::span<const double> weights, std::span<const double> bias,
                     std::size_t w, std::size_t h, std::vector<double>& out) {
    const std::size_t n = w * h;
    out.assign(out_ch * n, 0.0);
    for (std::size_t o = 0; o < out_ch; ++o) {
        double* dst_plane = out.data() + o * n;
        std::fill(dst_plane, dst_plane + n, bias[o]);
        for (std::size_t i = 0; i < in_ch; ++i) {
            const double* src_plane = in.data() + i * n;
            for (int ky = 0; ky < 3; ++ky) {
                const int dy = ky - 1;
                const Span2D ys = valid_range(dy, h);
                for (int kx = 0; kx < 3; ++kx) {
                    const int dx = kx - 1;
                    const Span2D xs = valid_range(dx, w);
                    const double wgt = weights[((o * in_ch + i) * 3 + static_cast<std::size_t>(ky)) * 3 +
                                               static_cast<std::size_t>(kx)];
                    for (std::size_t y = ys.lo; y < ys.hi; ++y) {
                        const double* src = src_plane + static_cast<std::ptrdiff_t>(y * w) +
                                            static_cast<std::ptrdiff_t>(dy) * static_cast<std::ptrdiff_t>(w) + dx;
                        double* dst = dst_plane + y * w;
                        for (std::size_t x = xs.lo; x < xs.hi; ++x) dst[x] += wgt * src[x];
                    }
                }
            }
        }
    }
}

// Accumulates weight and bias gradients; adds input gradients when d_in is given.
void conv3x3_backward(const std::vector<double>& in, const std::vector<double>& d_out,
                      std::size_t in_ch, std::size_t out_ch, std::span<const double> weights,
                      std::size_t w, std::size_t h, std::span<double> d_weights,
                      std::span<double> d_bias, std::vector<double>* d_in) {
    const std::size_t n = w * h;
    if (d_in) d_in->assign(in_ch * n, 0.0);
    for (std::size_t o = 0; o < out_ch; ++o) {
        const double* g_plane = d_out.data() + o * n;
        double bsum = 0.0;
        for (std::size_t p = 0; p < n; ++p) bsum += g_plane[p];
        d_bias[o] += bsum;
        for (std::size_t i = 0; i < in_ch; ++i) {
            const double* src_plane = in.data() + i * n;
            double* din_plane = d_in ? d_in->data() + i * n : nullptr;
            for (int ky = 0; ky < 3; ++ky) {
                const int dy = ky - 1;
                const Span2D ys = valid_range(dy, h);
                for (int kx = 0; kx < 3; ++kx) {
                    const int dx = kx - 1;
                    const Span2D xs = valid_range(dx, w);
                    const std::size_t widx = ((o * in_ch + i) * 3 + static_cast<std::size_t>(ky)) * 3 +
                                             static_cast<std::size_t>(kx);
                    const double wgt = weights[widx];
                    const std::ptrdiff_t shift =
                        static_cast<std::ptrdiff_t>(dy) * static_cast<std::ptrdiff_t>(w) + dx;
                    double acc = 0.0;
                    for (std::size_t y = ys.lo; y < ys.hi; ++y) {
                        const double* src = src_plane + static_cast<std::ptrdiff_t>(y * w) + shift;
                        const double* g = g_plane + y * w;
                        for (std::size_t x = xs.lo; x < xs.hi; ++x) acc += g[x] * src[x];
                        if (din_plane) {
                            double* din = din_plane + static_cast<std::ptrdiff_t>(y * w) + shift;
                            for (std::size_t x = xs.lo; x < xs.hi; ++x) din[x] += wgt * g[x];
                        }
                    }
                    d_weights[widx] += acc;
                }
            }
        }
    }
}

void relu_inplace(std::vector<double>& v) {
    for (double& x : v) x = x > 0.0 ? x : 0.0;
}

Activations run_forward(const MHeadsModel& model, const RgbImage& image) {
    Activations act;
    act.width = image.width();
    act.height = image.height();
    const std::size_t n = act.pixels();
    act.input.resize(kInputChannels * n);
    const auto rgb = image.values();
    for (std::size_t p = 0; p < n; ++p) {
        for (std::size_t c = 0; c < kInputChannels; ++c) act.input[c * n + p] = rgb[p * 3 + c];
    }
    conv3x3_forward(act.input, kInputChannels, kChannels, model.conv1_weights(), model.conv1_bias(),
                    act.width, act.height, act.hidden1);
    relu_inplace(act.hidden1);
    conv3x3_forward(act.hidden1, kChannels, kChannels, model.conv2_weights(), model.conv2_bias(),
                    act.width, act.height, act.hidden2);
    relu_inplace(act.hidden2);

    const std::size_t m_count = model.head_count();
    act.logits.assign(m_count * n, 0.0);
    for (std::size_t m = 0; m < m_count; ++m) {
        const auto wts = model.head_weights(m);
        double* z = act.logits.data() + m * n;
        std::fill(z, z + n, model.head_bias(m));
        for (std::size_t c = 0; c < kChannels; ++c) {
            const double* a = act.hidden2.data() + c * n;
            const double wc = wts[c];
            for (std::size_t p = 0; p < n; ++p) z[p] += wc * a[p];
        }
    }
    return act;
}

// Which hidden units are active; a change means the probe crossed a ReLU kink.
std::vector<bool> relu_pattern(const Activations& act) {
    std::vector<bool> out;
    out.reserve(act.hidden1.size() + act.hidden2.size());
    for (double v : act.hidden1) out.push_back(v > 0.0);
    for (double v : act.hidden2) out.push_back(v > 0.0);
    return out;
}

UncertaintyMap uncertainty_of(const Activations& act, std::size_t heads) {
    const std::size_t n = act.pixels();
    std::vector<SaliencyMap> plain;
    plain.reserve(heads);
    for (std::size_t m = 0; m < heads; ++m) {
        std::vector<double> s(n);
        for (std::size_t p = 0; p < n; ++p) s[p] = uats::sigmoid(act.logits[m * n + p]);
        plain.emplace_back(act.width, act.height, std::move(s));
    }
    return uats::uncertainty_from_heads(plain);
}

// Loss over all heads. Fills d_logits (M x N) with dLoss/dz when requested.
double head_loss(const Activations& act, std::size_t heads, const SoftLabelMap& label,
                 const TrainConfig& cfg, const UncertaintyMap* uncertainty,
                 std::vector<double>* d_logits) {
    const std::size_t n = act.pixels();
    const double eps = cfg.bce_clamp_epsilon;
    std::vector<double> temperature(n, 1.0);
    if (uncertainty) {
        for (std::size_t p = 0; p < n; ++p) {
            temperature[p] = std::exp(cfg.alpha.value() * (*uncertainty)[p]);
        }
    }
    if (d_logits) d_logits->assign(heads * n, 0.0);
    const double scale = 1.0 / (static_cast<double>(heads) * static_cast<double>(n));

    double total = 0.0;
    for (std::size_t m = 0; m < heads; ++m) {
        double head_sum = 0.0;
        for (std::size_t p = 0; p < n; ++p) {
            const double t = temperature[p];
            const double s = uats::sigmoid(act.logits[m * n + p] / t);
            const double y = label[p];
            const double sc = std::clamp(s, eps, 1.0 - eps);
            head_sum -= y * std::log(sc) + (1.0 - y) * std::log(1.0 - sc);
            if (d_logits && s >= eps && s <= 1.0 - eps) {
                (*d_logits)[m * n + p] = (s - y) / t * scale;
            }
        }
        total += head_sum / static_cast<double>(n);
    }
    return total / static_cast<double>(heads);
}

void check_label(const RgbImage& image, const SoftLabelMap& label) {
    if (image.width() != label.width() || image.height() != label.height()) {
        throw ArgumentError("label dimensions do not match the image");
    }
}

}  // namespace

MHeadsModel::MHeadsModel(std::size_t heads)
    : MHeadsModel(heads, std::vector<double>(parameter_count(heads), 0.0)) {}

MHeadsModel::MHeadsModel(std::size_t heads, std::vector<double> parameters)
    : heads_(heads), params_(std::move(parameters)) {
    if (heads_ < 2) {
        throw ArgumentError("MHeadsModel: head count must be >= 2");
    }
    if (params_.size() != parameter_count(heads_)) {
        throw ArgumentError("MHeadsModel: expected " + std::to_string(parameter_count(heads_)) +
                            " parameters, got " + std::to_string(params_.size()));
    }
    if (!std::all_of(params_.begin(), params_.end(), [](double v) { return std::isfinite(v); })) {
        throw ValidationError("MHeadsModel: non-finite parameter");
    }
}

void TrainConfig::validate() const {
    if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
        throw ArgumentError("learning rate must be a finite non-negative real");
    }
    if (!(momentum >= 0.0 && momentum < 1.0)) {
        throw ArgumentError("momentum must lie in [0, 1)");
    }
    if (epochs == 0) {
        throw ArgumentError("epochs must be positive");
    }
    if (!(bce_clamp_epsilon > 0.0 && bce_clamp_epsilon < 0.1)) {
        throw ArgumentError("BCE clamp epsilon must lie in (0, 0.1)");
    }
}

MHeadsModel init_model(std::size_t heads, std::uint64_t seed) {
    MHeadsModel model(heads);
    auto params = model.parameters();
    SplitMix64 rng(seed);
    auto fill = [&](std::size_t offset, std::size_t count, std::size_t fan_in) {
        const double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
        for (std::size_t i = 0; i < count; ++i) params[offset + i] = rng.uniform(-bound, bound);
    };
    fill(0, kConv1Weights, kInputChannels * kKernelTaps);
    fill(kConv1Params, kConv2Weights, kChannels * kKernelTaps);
    for (std::size_t m = 0; m < heads; ++m) fill(MHeadsModel::head_offset(m), kChannels, kChannels);
    return model;
}

std::vector<LogitMap> forward(const MHeadsModel& model, const RgbImage& image) {
    const Activations act = run_forward(model, image);
    const std::size_t n = act.pixels();
    std::vector<LogitMap> out;
    out.reserve(model.head_count());
    for (std::size_t m = 0; m < model.head_count(); ++m) {
        out.emplace_back(act.width, act.height,
                         std::vector<double>(act.logits.begin() + static_cast<std::ptrdiff_t>(m * n),
                                             act.logits.begin() + static_cast<std::ptrdiff_t>((m + 1) * n)));
    }
    return out;
}

double bce_loss(const SaliencyMap& s, const SoftLabelMap& y, double eps) {
    if (!s.same_shape(y)) {
        throw ArgumentError("bce_loss: prediction and label dimensions differ");
    }
    if (!(eps > 0.0 && eps < 0.1)) {
        throw ArgumentError("bce_loss: eps must lie in (0, 0.1)");
    }
    NeumaierSum sum;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const double sc = std::clamp(s[i], eps, 1.0 - eps);
        sum.add(-(y[i] * std::log(sc) + (1.0 - y[i]) * std::log(1.0 - sc)));
    }
    return sum.value() / static_cast<double>(s.size());
}

LossAndGrad loss_and_grad(const MHeadsModel& model, const RgbImage& image,
                          const SoftLabelMap& label, const TrainConfig& cfg) {
    check_label(image, label);
    const Activations act = run_forward(model, image);
    const std::size_t n = act.pixels();
    const std::size_t heads = model.head_count();

    LossAndGrad out;
    if (cfg.uats_enabled) out.uncertainty = uncertainty_of(act, heads);

    std::vector<double> d_logits;
    out.loss = head_loss(act, heads, label, cfg, out.uncertainty ? &*out.uncertainty : nullptr,
                         &d_logits);

    out.grads.values.assign(model.parameters().size(), 0.0);
    std::span<double> g(out.grads.values);

    // Heads.
    std::vector<double> d_hidden2(kChannels * n, 0.0);
    for (std::size_t m = 0; m < heads; ++m) {
        const std::size_t off = MHeadsModel::head_offset(m);
        const double* dz = d_logits.data() + m * n;
        const auto wts = model.head_weights(m);
        double bsum = 0.0;
        for (std::size_t p = 0; p < n; ++p) bsum += dz[p];
        g[off + kChannels] += bsum;
        for (std::size_t c = 0; c < kChannels; ++c) {
            const double* a = act.hidden2.data() + c * n;
            double* da = d_hidden2.data() + c * n;
            double acc = 0.0;
            for (std::size_t p = 0; p < n; ++p) {
                acc += dz[p] * a[p];
                da[p] += wts[c] * dz[p];
            }
            g[off + c] += acc;
        }
    }
    for (std::size_t i = 0; i < d_hidden2.size(); ++i) {
        if (act.hidden2[i] <= 0.0) d_hidden2[i] = 0.0;
    }

    std::vector<double> d_hidden1;
    conv3x3_backward(act.hidden1, d_hidden2, kChannels, kChannels, model.conv2_weights(),
                     act.width, act.height, g.subspan(kConv1Params, kConv2Weights),
                     g.subspan(kConv1Params + kConv2Weights, kChannels), &d_hidden1);
    for (std::size_t i = 0; i < d_hidden1.size(); ++i) {
        if (act.hidden1[i] <= 0.0) d_hidden1[i] = 0.0;
    }
    conv3x3_backward(act.input, d_hidden1, kInputChannels, kChannels, model.conv1_weights(),
                     act.width, act.height, g.subspan(0, kConv1Weights),
                     g.subspan(kConv1Weights, kChannels), nullptr);
    return out;
}

double loss_with_uncertainty(const MHeadsModel& model, const RgbImage& image,
                             const SoftLabelMap& label, const TrainConfig& cfg,
                             const UncertaintyMap* frozen) {
    check_label(image, label);
    if (frozen && (frozen->width() != image.width() || frozen->height() != image.height())) {
        throw ArgumentError("uncertainty dimensions do not match the image");
    }
    const Activations act = run_forward(model, image);
    return head_loss(act, model.head_count(), label, cfg, frozen, nullptr);
}

void sgd_step(MHeadsModel& model, const Gradients& grads, OptimizerState& state,
              double learning_rate, double momentum) {
    auto params = model.parameters();
    if (grads.values.size() != params.size() || state.velocity.size() != params.size()) {
        throw ArgumentError("sgd_step: gradient or optimizer state shape mismatch");
    }
    for (std::size_t i = 0; i < params.size(); ++i) {
        state.velocity[i] = momentum * state.velocity[i] + grads.values[i];
        params[i] -= learning_rate * state.velocity[i];
    }
}

Prediction predict_from_logits(std::span<const LogitMap> logits, bool uats_enabled,
                               uats::Alpha alpha) {
    if (logits.empty()) {
        throw ArgumentError("predict: no head logits");
    }
    const std::size_t w = logits.front().width();
    const std::size_t h = logits.front().height();
    std::vector<SaliencyMap> plain;
    plain.reserve(logits.size());
    for (const auto& z : logits) plain.push_back(uats::sigmoid(z));

    UncertaintyMap uncertainty = logits.size() >= 2 ? uats::uncertainty_from_heads(plain)
                                                    : UncertaintyMap::filled(w, h, 0.0);
    std::vector<double> sum(w * h, 0.0);
    for (std::size_t m = 0; m < logits.size(); ++m) {
        const SaliencyMap head =
            uats_enabled ? uats::apply_uats(logits[m], uncertainty, alpha) : plain[m];
        for (std::size_t p = 0; p < sum.size(); ++p) sum[p] += head[p];
    }
    const auto count = static_cast<double>(logits.size());
    for (double& v : sum) v = std::clamp(v / count, 0.0, 1.0);
    return {SaliencyMap(w, h, std::move(sum)), std::move(uncertainty)};
}

Prediction predict(const MHeadsModel& model, const RgbImage& image, bool uats_enabled,
                   uats::Alpha alpha) {
    const auto logits = forward(model, image);
    return predict_from_logits(logits, uats_enabled, alpha);
}

EvalMetrics evaluate(const MHeadsModel& model, std::span<const EvalImage> eval_set,
                     bool uats_enabled, uats::Alpha alpha) {
    if (eval_set.empty()) {
        throw ArgumentError("evaluate: empty evaluation set");
    }
    std::vector<SaliencyMap> predictions;
    predictions.reserve(eval_set.size());
    std::vector<metrics::FCurve> curves;
    NeumaierSum mae_sum;
    for (const auto& e : eval_set) {
        predictions.push_back(predict(model, e.image, uats_enabled, alpha).saliency);
        mae_sum.add(metrics::mae(predictions.back(), e.mask));
        try {
            curves.push_back(metrics::fbeta_curve(predictions.back(), e.mask));
        } catch (const DegenerateGroundTruthError&) {
            // No foreground: the image does not contribute to the F-measure.
        }
    }
    std::vector<calib::EvalPair> pairs;
    pairs.reserve(eval_set.size());
    for (std::size_t i = 0; i < eval_set.size(); ++i) {
        pairs.push_back({std::to_string(i), predictions[i], eval_set[i].mask});
    }
    EvalMetrics out;
    out.mae = mae_sum.value() / static_cast<double>(eval_set.size());
    out.max_f = metrics::average_curves(curves).max_f;
    out.calibration = calib::dataset_calibration(pairs).dataset;
    return out;
}

TrainResult train(MHeadsModel model, std::span<const TrainImage> train_set,
                  std::span<const EvalImage> eval_set, const TrainConfig& cfg) {
    cfg.validate();
    struct Step {
        std::size_t image;
        std::size_t label;
    };
    std::vector<Step> steps;
    for (std::size_t i = 0; i < train_set.size(); ++i) {
        if (train_set[i].labels.empty()) {
            throw ArgumentError("train: image without labels");
        }
        for (const auto& label : train_set[i].labels) check_label(train_set[i].image, label);
        for (std::size_t k = 0; k < train_set[i].labels.size(); ++k) steps.push_back({i, k});
    }
    if (steps.empty()) {
        throw ArgumentError("train: empty training set");
    }

    OptimizerState state(model);
    SplitMix64 shuffle_rng(cfg.seed ^ kShuffleStream);
    TrainHistory history;
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        for (std::size_t i = steps.size() - 1; i > 0; --i) {
            std::swap(steps[i], steps[shuffle_rng.below(i + 1)]);
        }
        NeumaierSum loss_sum;
        for (const Step& step : steps) {
            const TrainImage& sample = train_set[step.image];
            LossAndGrad lg = loss_and_grad(model, sample.image, sample.labels[step.label], cfg);
            loss_sum.add(lg.loss);
            sgd_step(model, lg.grads, state, cfg.learning_rate, cfg.momentum);
        }
        EpochRecord record;
        record.mean_loss = loss_sum.value() / static_cast<double>(steps.size());
        if (!eval_set.empty()) {
            record.eval = evaluate(model, eval_set, cfg.uats_enabled, cfg.alpha);
        }
        history.epochs.push_back(record);
    }
    return {std::move(model), std::move(history)};
}

GradientCheckResult gradient_check(const MHeadsModel& model, const RgbImage& image,
                                   const SoftLabelMap& label, const TrainConfig& cfg) {
    if (image.width() > kGradientCheckMaxSide || image.height() > kGradientCheckMaxSide) {
        throw ArgumentError("gradient_check: image larger than 16x16");
    }
    check_label(image, label);
    const LossAndGrad analytic = loss_and_grad(model, image, label, cfg);
    const UncertaintyMap* frozen = analytic.uncertainty ? &*analytic.uncertainty : nullptr;
    const std::vector<bool> pattern = relu_pattern(run_forward(model, image));

    MHeadsModel probe = model;
    auto params = probe.parameters();
    GradientCheckResult result;
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double original = params[i];
        params[i] = original + kGradientCheckStep;
        const Activations act_up = run_forward(probe, image);
        const double up = head_loss(act_up, probe.head_count(), label, cfg, frozen, nullptr);
        params[i] = original - kGradientCheckStep;
        const Activations act_down = run_forward(probe, image);
        const double down = head_loss(act_down, probe.head_count(), label, cfg, frozen, nullptr);
        params[i] = original;
        if (relu_pattern(act_up) != pattern || relu_pattern(act_down) != pattern) {
            ++result.skipped;
            continue;
        }
        const double fd = (up - down) / (2.0 * kGradientCheckStep);
        const double g = analytic.grads.values[i];
        const double rel = std::abs(g - fd) / std::max(1e-8, std::abs(g) + std::abs(fd));
        result.max_relative_error = std::max(result.max_relative_error, rel);
        ++result.checked;
    }
    return result;
}

}  // namespace sodcal::net
