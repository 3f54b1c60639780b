#include <benchmark/benchmark.h>

#include "mmcf/models.hpp"
#include "mmcf/rng.hpp"

namespace {

using namespace mmcf;

Tensor<float> random_tensor(Shape shape, std::uint64_t seed) {
    Tensor<float> t(std::move(shape));
    Rng rng(seed);
    for (auto& v : t.values()) v = static_cast<float>(rng.uniform());
    return t;
}

Tensor<float> one_hot_targets(std::size_t n) {
    Tensor<float> t({n, kClassCount});
    for (std::size_t i = 0; i < n; ++i) t[i * kClassCount + i % kClassCount] = 1.0f;
    return t;
}

void BM_TrainStep(benchmark::State& state, ModelKind kind) {
    const int size = static_cast<int>(state.range(0));
    const std::size_t batch = 32;
    const auto net = initial_network(kind, size, 7);
    std::vector<Tensor<float>> inputs;
    for (std::size_t b = 0; b < net.spec().input_shapes.size(); ++b) {
        Shape s = net.spec().input_shapes[b];
        s.insert(s.begin(), batch);
        inputs.push_back(random_tensor(s, 11 + b));
    }
    const auto targets = one_hot_targets(batch);
    for (auto _ : state) {
        const auto acts = net.forward(inputs);
        auto res = net.backward(acts, targets, LossKind::Normalized);
        benchmark::DoNotOptimize(res.loss);
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * batch));
}

void BM_Forward(benchmark::State& state, ModelKind kind) {
    const int size = static_cast<int>(state.range(0));
    const std::size_t batch = 64;
    const auto net = initial_network(kind, size, 7);
    std::vector<Tensor<float>> inputs;
    for (std::size_t b = 0; b < net.spec().input_shapes.size(); ++b) {
        Shape s = net.spec().input_shapes[b];
        s.insert(s.begin(), batch);
        inputs.push_back(random_tensor(s, 11 + b));
    }
    for (auto _ : state) {
        auto acts = net.forward(inputs);
        benchmark::DoNotOptimize(acts.outputs.back().data());
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * batch));
}

}  // namespace

BENCHMARK_CAPTURE(BM_TrainStep, vision, mmcf::ModelKind::VisionCNN)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_TrainStep, sensor_fusion, mmcf::ModelKind::SensorFusionNet)
    ->Arg(32)
    ->Arg(64)
    ->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_TrainStep, tactile, mmcf::ModelKind::TactileMLP)->Arg(64)->Unit(benchmark::kMicrosecond);
BENCHMARK_CAPTURE(BM_TrainStep, proprio, mmcf::ModelKind::ProprioMLP)->Arg(64)->Unit(benchmark::kMicrosecond);
BENCHMARK_CAPTURE(BM_Forward, vision, mmcf::ModelKind::VisionCNN)->Arg(64)->Unit(benchmark::kMillisecond);
