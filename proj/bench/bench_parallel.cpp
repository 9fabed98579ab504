#include <benchmark/benchmark.h>

#include <vector>

#include "erva/freqresp.hpp"
#include "erva/nmpc.hpp"

using namespace erva;

namespace {

FrSweepConfig small_sweep() {
    FrSweepConfig cfg;
    cfg.f_min = 3.0;
    cfg.f_max = 6.0;
    cfg.n_points = 8;
    return cfg;
}

struct GradientCase {
    ErvaState x0;
    std::vector<double> u;
    std::vector<double> w;
    MpcConfig cfg;
};

GradientCase gradient_case() {
    GradientCase c;
    c.x0 << 0.004, -0.05, 0.001, 0.08, 0.002, 0.1;
    for (int k = 0; k < c.cfg.horizon; ++k) {
        c.u.push_back(5e3 + 1e3 * k);
        c.w.push_back(1e-3 * (k % 3 - 1));
    }
    c.cfg.alpha2 = 0.01;
    return c;
}

void BM_SweepParallel(benchmark::State& state) {
    const auto cfg = small_sweep();
    for (auto _ : state) benchmark::DoNotOptimize(sweep(SweepModel::erva_passive, cfg, {}));
}

void BM_SweepSerial(benchmark::State& state) {
    const auto cfg = small_sweep();
    for (auto _ : state) benchmark::DoNotOptimize(sweep_serial(SweepModel::erva_passive, cfg, {}));
}

void BM_GradientParallel(benchmark::State& state) {
    const auto c = gradient_case();
    for (auto _ : state)
        benchmark::DoNotOptimize(horizon_gradient(c.x0, c.x0(1), c.u, c.w, c.cfg, {}));
}

void BM_GradientSerial(benchmark::State& state) {
    const auto c = gradient_case();
    for (auto _ : state)
        benchmark::DoNotOptimize(horizon_gradient_serial(c.x0, c.x0(1), c.u, c.w, c.cfg, {}));
}

}  // namespace

BENCHMARK(BM_SweepParallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SweepSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_GradientParallel)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_GradientSerial)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
