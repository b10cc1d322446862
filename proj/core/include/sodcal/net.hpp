#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sodcal/maps.hpp"
#include "sodcal/uats.hpp"

namespace sodcal::net {

// Shared encoder: conv3x3(3->8)+ReLU, conv3x3(8->8)+ReLU, zero padding.
// Heads: M independent 1x1 convolutions 8->1.
inline constexpr std::size_t kInputChannels = 3;
inline constexpr std::size_t kChannels = 8;
inline constexpr std::size_t kKernelTaps = 9;
inline constexpr std::size_t kConv1Weights = kChannels * kInputChannels * kKernelTaps;  // 216
inline constexpr std::size_t kConv1Params = kConv1Weights + kChannels;                    // 224
inline constexpr std::size_t kConv2Weights = kChannels * kChannels * kKernelTaps;       // 576
inline constexpr std::size_t kConv2Params = kConv2Weights + kChannels;                    // 584
inline constexpr std::size_t kHeadParams = kChannels + 1;                                 // 9
inline constexpr std::size_t kDefaultHeads = 5;

constexpr std::size_t parameter_count(std::size_t heads) noexcept {
    return kConv1Params + kConv2Params + kHeadParams * heads;
}

// All parameters live in one flat buffer, in this fixed order:
//   conv1 weights [out][in][ky][kx], conv1 bias [out],
//   conv2 weights [out][in][ky][kx], conv2 bias [out],
//   head 1 weights [in] + bias, ..., head M weights [in] + bias.
// The order is shared by initialization, gradients, the optimizer and the
// model file format.
class MHeadsModel {
public:
    // All-zero parameters.
    explicit MHeadsModel(std::size_t heads);
    MHeadsModel(std::size_t heads, std::vector<double> parameters);

    std::size_t head_count() const noexcept { return heads_; }
    std::span<const double> parameters() const noexcept { return params_; }
    std::span<double> parameters() noexcept { return params_; }

    std::span<const double> conv1_weights() const noexcept { return view(0, kConv1Weights); }
    std::span<const double> conv1_bias() const noexcept { return view(kConv1Weights, kChannels); }
    std::span<const double> conv2_weights() const noexcept { return view(kConv1Params, kConv2Weights); }
    std::span<const double> conv2_bias() const noexcept {
        return view(kConv1Params + kConv2Weights, kChannels);
    }
    std::span<const double> head_weights(std::size_t m) const noexcept {
        return view(head_offset(m), kChannels);
    }
    double head_bias(std::size_t m) const noexcept { return params_[head_offset(m) + kChannels]; }

    static constexpr std::size_t head_offset(std::size_t m) noexcept {
        return kConv1Params + kConv2Params + kHeadParams * m;
    }

    friend bool operator==(const MHeadsModel&, const MHeadsModel&) = default;

private:
    std::span<const double> view(std::size_t offset, std::size_t n) const noexcept {
        return std::span<const double>(params_).subspan(offset, n);
    }

    std::size_t heads_;
    std::vector<double> params_;
};

// Same layout as MHeadsModel::parameters().
struct Gradients {
    std::vector<double> values;
};

struct OptimizerState {
    explicit OptimizerState(const MHeadsModel& model)
        : velocity(model.parameters().size(), 0.0) {}
    std::vector<double> velocity;
};

struct TrainConfig {
    double learning_rate = 0.05;
    double momentum = 0.9;
    std::size_t epochs = 20;
    uats::Alpha alpha{};
    bool uats_enabled = false;
    std::uint64_t seed = 0;
    double bce_clamp_epsilon = 1e-7;

    void validate() const;
};

// Weights ~ U(-b, b), b = sqrt(6 / fan_in), drawn from SplitMix64(seed) in
// parameter order (conv1, conv2, heads 1..M); biases are zero.
MHeadsModel init_model(std::size_t heads, std::uint64_t seed);

std::vector<LogitMap> forward(const MHeadsModel& model, const RgbImage& image);

// Mean over pixels of -(y ln s + (1-y) ln(1-s)) with s clamped to [eps, 1-eps].
double bce_loss(const SaliencyMap& s, const SoftLabelMap& y, double eps);

struct LossAndGrad {
    double loss = 0.0;
    Gradients grads;
    // Uncertainty used for the temperature; present iff UATS was enabled.
    std::optional<UncertaintyMap> uncertainty;
};

// Mean over heads of the BCE of each head's (optionally UATS-softened)
// output. The uncertainty map is computed from the current heads and treated
// as a constant when differentiating.
LossAndGrad loss_and_grad(const MHeadsModel& model, const RgbImage& image,
                          const SoftLabelMap& label, const TrainConfig& cfg);

// Same loss with the uncertainty map supplied instead of recomputed. Used by
// the finite-difference check to hold U fixed while parameters move.
double loss_with_uncertainty(const MHeadsModel& model, const RgbImage& image,
                             const SoftLabelMap& label, const TrainConfig& cfg,
                             const UncertaintyMap* frozen);

// v <- momentum * v + g; p <- p - lr * v.
void sgd_step(MHeadsModel& model, const Gradients& grads, OptimizerState& state,
              double learning_rate, double momentum);

// One image with one or more training targets (several for BDS augmentation).
struct TrainImage {
    RgbImage image;
    std::vector<SoftLabelMap> labels;
};

struct EvalImage {
    RgbImage image;
    BinaryMask mask;
};

struct EvalMetrics {
    double mae = 0.0;
    double max_f = 0.0;
    double calibration = 0.0;
};

struct EpochRecord {
    double mean_loss = 0.0;
    std::optional<EvalMetrics> eval;  // absent without an evaluation set
};

struct TrainHistory {
    std::vector<EpochRecord> epochs;
};

struct TrainResult {
    MHeadsModel model;
    TrainHistory history;
};

// Batch size 1: every (image, label) pair is one SGD step, visited in a
// freshly shuffled order each epoch.
TrainResult train(MHeadsModel model, std::span<const TrainImage> train_set,
                  std::span<const EvalImage> eval_set, const TrainConfig& cfg);

struct Prediction {
    SaliencyMap saliency;
    UncertaintyMap uncertainty;
};

// Mean over heads of sigmoid(z_m), or of the UATS-softened outputs.
Prediction predict(const MHeadsModel& model, const RgbImage& image, bool uats_enabled,
                   uats::Alpha alpha);
Prediction predict_from_logits(std::span<const LogitMap> logits, bool uats_enabled,
                               uats::Alpha alpha);

// MAE, max F (beta^2 = 0.3, averaged curve) and dataset calibration.
EvalMetrics evaluate(const MHeadsModel& model, std::span<const EvalImage> eval_set,
                     bool uats_enabled, uats::Alpha alpha);

inline constexpr double kGradientCheckStep = 1e-5;
inline constexpr std::size_t kGradientCheckMaxSide = 16;

struct GradientCheckResult {
    double max_relative_error = 0.0;
    std::size_t checked = 0;
    std::size_t skipped = 0;  // probes whose +-h step changed a ReLU on/off state
};

// Central differences over every parameter, with the largest
// |g - g_fd| / max(1e-8, |g| + |g_fd|) over the probes that stay on one
// side of every ReLU kink.
GradientCheckResult gradient_check(const MHeadsModel& model, const RgbImage& image,
                                   const SoftLabelMap& label, const TrainConfig& cfg);

}  // namespace sodcal::net
