// OpenMP kernels against their serial references.
#include <benchmark/benchmark.h>

#include "qlcp/critical_values.hpp"
#include "qlcp/experiments.hpp"
#include "qlcp/simulate.hpp"
#include "qlcp/test_stat.hpp"

using namespace qlcp;

namespace {

std::vector<double> series(const ModelSpec& spec, const ParamVector& theta, std::size_t n) {
    SimPlan plan(spec, theta);
    plan.n = n;
    plan.seed = 1;
    return generate(plan);
}

void BM_SupBridge(benchmark::State& state) {
    const auto d = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(simulate_sup_bb(d, 1000, 5000, 1));
    state.SetItemsProcessed(state.iterations() * 5000);
}

void BM_SupBridgeSerial(benchmark::State& state) {
    const auto d = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(simulate_sup_bb_serial(d, 1000, 5000, 1));
    state.SetItemsProcessed(state.iterations() * 5000);
}

void BM_ScanArParallel(benchmark::State& state) {
    const auto spec = ModelSpec::ar(1);
    const auto x = series(spec, ParamVector{0.5}, static_cast<std::size_t>(state.range(0)));
    const auto w = default_window(spec, x.size());
    for (auto _ : state) benchmark::DoNotOptimize(scan(spec, x, w, 0.05, CriticalTable::builtin()));
}

void BM_ScanArSerial(benchmark::State& state) {
    const auto spec = ModelSpec::ar(1);
    const auto x = series(spec, ParamVector{0.5}, static_cast<std::size_t>(state.range(0)));
    const auto w = default_window(spec, x.size());
    ScanOptions opts;
    opts.parallel = false;
    for (auto _ : state) benchmark::DoNotOptimize(scan(spec, x, w, 0.05, CriticalTable::builtin(), opts));
}

void BM_ScanArReference(benchmark::State& state) {
    const auto spec = ModelSpec::ar(1);
    const auto x = series(spec, ParamVector{0.5}, static_cast<std::size_t>(state.range(0)));
    const auto w = default_window(spec, x.size());
    for (auto _ : state) benchmark::DoNotOptimize(scan_reference(spec, x, w, 0.05, CriticalTable::builtin()));
}

void BM_ScanArch(benchmark::State& state) {
    const auto spec = ModelSpec::arch();
    const auto x = series(spec, ParamVector{1, 0.3}, 500);
    const auto w = default_window(spec, x.size());
    ScanOptions opts;
    opts.parallel = state.range(0) != 0;
    for (auto _ : state) benchmark::DoNotOptimize(scan(spec, x, w, 0.05, CriticalTable::builtin(), opts));
}

void BM_Experiment(benchmark::State& state) {
    ExperimentConfig cfg;
    cfg.plan = SimPlan(ModelSpec::ar(1), ParamVector{0.5});
    cfg.plan.n = 512;
    cfg.replications = 8;
    for (auto _ : state) benchmark::DoNotOptimize(run_experiment(cfg, state.range(0) != 0));
}

} // namespace

BENCHMARK(BM_SupBridge)->Arg(1)->Arg(3)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SupBridgeSerial)->Arg(1)->Arg(3)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ScanArParallel)->Arg(512)->Arg(2048)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ScanArSerial)->Arg(512)->Arg(2048)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ScanArReference)->Arg(512)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ScanArch)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Experiment)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
