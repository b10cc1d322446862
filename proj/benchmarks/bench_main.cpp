#include <benchmark/benchmark.h>

#include <algorithm>

#include "sodcal/bds.hpp"
#include "sodcal/calib.hpp"
#include "sodcal/metrics.hpp"
#include "sodcal/net.hpp"
#include "sodcal/splitmix64.hpp"
#include "sodcal/synth.hpp"

namespace {

using namespace sodcal;

synth::Sample sample(std::size_t size) {
    synth::SynthConfig cfg;
    cfg.size = size;
    return synth::generate_sample(cfg, 1).first;
}

SaliencyMap noisy_prediction(const BinaryMask& mask) {
    SplitMix64 rng(3);
    std::vector<double> v(mask.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        v[i] = std::clamp(0.8 * mask[i] + 0.1 + 0.2 * (rng.uniform() - 0.5), 0.0, 1.0);
    }
    return SaliencyMap(mask.width(), mask.height(), std::move(v));
}

void BM_SmoothLabel(benchmark::State& state) {
    const auto s = sample(static_cast<std::size_t>(state.range(0)));
    const double sigma = static_cast<double>(state.range(1));
    for (auto _ : state) benchmark::DoNotOptimize(bds::smooth_label(s.mask, sigma));
}
BENCHMARK(BM_SmoothLabel)->Args({48, 1})->Args({48, 5})->Args({256, 1})->Args({256, 5});

void BM_ImageCalibration(benchmark::State& state) {
    const auto s = sample(static_cast<std::size_t>(state.range(0)));
    const SaliencyMap pred = noisy_prediction(s.mask);
    for (auto _ : state) benchmark::DoNotOptimize(calib::image_calibration(pred, s.mask));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(pred.size()));
}
BENCHMARK(BM_ImageCalibration)->Arg(48)->Arg(256);

void BM_FbetaCurve(benchmark::State& state) {
    const auto s = sample(static_cast<std::size_t>(state.range(0)));
    const SaliencyMap pred = noisy_prediction(s.mask);
    for (auto _ : state) benchmark::DoNotOptimize(metrics::fbeta_curve(pred, s.mask));
}
BENCHMARK(BM_FbetaCurve)->Arg(48)->Arg(256);

void BM_LossAndGrad(benchmark::State& state) {
    const auto s = sample(48);
    const net::MHeadsModel model = net::init_model(5, 1);
    const SoftLabelMap label = to_soft_label(s.mask);
    net::TrainConfig cfg;
    cfg.uats_enabled = state.range(0) != 0;
    for (auto _ : state) benchmark::DoNotOptimize(net::loss_and_grad(model, s.image, label, cfg));
}
BENCHMARK(BM_LossAndGrad)->Arg(0)->Arg(1);

void BM_Predict(benchmark::State& state) {
    const auto s = sample(48);
    const net::MHeadsModel model = net::init_model(5, 1);
    for (auto _ : state) benchmark::DoNotOptimize(net::predict(model, s.image, true, uats::Alpha()));
}
BENCHMARK(BM_Predict);

}  // namespace

BENCHMARK_MAIN();
