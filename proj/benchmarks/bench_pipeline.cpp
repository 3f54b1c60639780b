#include <benchmark/benchmark.h>

#include "mmcf/datagen.hpp"
#include "mmcf/preprocess.hpp"
#include "mmcf/sync.hpp"

namespace {

using namespace mmcf;

void BM_RenderFrame(benchmark::State& state) {
    GeneratorConfig cfg;
    cfg.image_size = static_cast<int>(state.range(0));
    const Scene scene = make_scene(cfg, 3);
    std::uint64_t seed = 0;
    for (auto _ : state) {
        auto f = render_frame(ContainerClass::BottleHalf, 0.5, 0.4, scene, cfg, ++seed);
        benchmark::DoNotOptimize(f.image.data.data());
    }
}
BENCHMARK(BM_RenderFrame)->Arg(64)->Arg(128)->Unit(benchmark::kMicrosecond);

void BM_GenerateEpisode(benchmark::State& state) {
    GeneratorConfig cfg;
    std::uint64_t seed = 0;
    for (auto _ : state) {
        auto ep = generate_episode(ContainerClass::CanFull, cfg, ++seed, "ep");
        benchmark::DoNotOptimize(ep.frames.data());
    }
}
BENCHMARK(BM_GenerateEpisode)->Unit(benchmark::kMillisecond);

void BM_Synchronize(benchmark::State& state) {
    GeneratorConfig cfg;
    const Episode ep = generate_episode(ContainerClass::SpamFull, cfg, 5, "ep");
    for (auto _ : state) {
        auto samples = synchronize(ep, SyncConfig{});
        benchmark::DoNotOptimize(samples.data());
    }
}
BENCHMARK(BM_Synchronize)->Unit(benchmark::kMicrosecond);

void BM_PreprocessFrame(benchmark::State& state) {
    GeneratorConfig cfg;
    const Scene scene = make_scene(cfg, 3);
    const auto f = render_frame(ContainerClass::CanEmpty, 0.0, 0.5, scene, cfg, 9);
    for (auto _ : state) {
        auto t = preprocess_frame(f.image, f.box, static_cast<int>(state.range(0)));
        benchmark::DoNotOptimize(t.data());
    }
}
BENCHMARK(BM_PreprocessFrame)->Arg(64)->Unit(benchmark::kMicrosecond);

}  // namespace
BENCHMARK_MAIN();
