// Parallel kernels vs. the serial reference implementations.

#include <benchmark/benchmark.h>

#include <random>

#include "sarfuse/diffusion.hpp"
#include "sarfuse/fusion.hpp"
#include "sarfuse/metrics.hpp"
#include "sarfuse/reference.hpp"

namespace {

sarfuse::Raster random_raster(int w, int h, int b, uint32_t seed) {
    sarfuse::Raster r(w, h, b);
    std::mt19937 rng(seed);
    for (auto& v : r.values) v = float(double(rng()) / 4294967296.0);
    return r;
}

sarfuse::DiffusionParams diff_params() {
    sarfuse::DiffusionParams p;
    p.iterations = 5;
    return p;
}

void BM_diffuse_parallel(benchmark::State& state) {
    const auto img = random_raster(256, 256, 3, 7);
    const auto p = diff_params();
    for (auto _ : state) benchmark::DoNotOptimize(sarfuse::diffuse(img, p));
}
BENCHMARK(BM_diffuse_parallel);

void BM_diffuse_serial(benchmark::State& state) {
    const auto img = random_raster(256, 256, 3, 7);
    const auto p = diff_params();
    for (auto _ : state) benchmark::DoNotOptimize(sarfuse::ref::diffuse(img, p));
}
BENCHMARK(BM_diffuse_serial);

void BM_uiqi_integral(benchmark::State& state) {
    const auto f = random_raster(256, 256, 1, 11);
    const auto r = random_raster(256, 256, 1, 12);
    const sarfuse::MetricParams p;
    for (auto _ : state) benchmark::DoNotOptimize(sarfuse::uiqi(f, r, p));
}
BENCHMARK(BM_uiqi_integral);

void BM_uiqi_direct(benchmark::State& state) {
    const auto f = random_raster(256, 256, 1, 11);
    const auto r = random_raster(256, 256, 1, 12);
    const sarfuse::MetricParams p;
    for (auto _ : state) benchmark::DoNotOptimize(sarfuse::ref::uiqi(f, r, p));
}
BENCHMARK(BM_uiqi_direct);

void BM_ssim_integral(benchmark::State& state) {
    const auto f = random_raster(256, 256, 1, 21);
    const auto r = random_raster(256, 256, 1, 22);
    const sarfuse::MetricParams p;
    for (auto _ : state) benchmark::DoNotOptimize(sarfuse::ssim(f, r, p));
}
BENCHMARK(BM_ssim_integral);

void BM_ssim_direct(benchmark::State& state) {
    const auto f = random_raster(256, 256, 1, 21);
    const auto r = random_raster(256, 256, 1, 22);
    const sarfuse::MetricParams p;
    for (auto _ : state) benchmark::DoNotOptimize(sarfuse::ref::ssim(f, r, p));
}
BENCHMARK(BM_ssim_direct);

void BM_pca_weights_parallel(benchmark::State& state) {
    const auto a = random_raster(512, 512, 1, 31);
    const auto b = random_raster(512, 512, 1, 32);
    for (auto _ : state) benchmark::DoNotOptimize(sarfuse::pca_weights(a.values, b.values));
}
BENCHMARK(BM_pca_weights_parallel);

void BM_pca_weights_serial(benchmark::State& state) {
    const auto a = random_raster(512, 512, 1, 31);
    const auto b = random_raster(512, 512, 1, 32);
    for (auto _ : state) benchmark::DoNotOptimize(sarfuse::ref::pca_weights(a.values, b.values));
}
BENCHMARK(BM_pca_weights_serial);

}  // namespace

BENCHMARK_MAIN();
