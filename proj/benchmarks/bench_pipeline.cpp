#include <benchmark/benchmark.h>

#include "isofdr/fdr_core.hpp"
#include "isofdr/histogram.hpp"
#include "isofdr/null_model.hpp"
#include "isofdr/simulation.hpp"

using namespace isofdr;

namespace {

void BM_FitNull(benchmark::State& state) {
    const ScenarioSpec spec = normal_preset();
    const Sample s = sample_scenario(spec, 0);
    const Histogram h = build_histogram(s.stats, spec.width, spec.hist_range);
    for (auto _ : state) benchmark::DoNotOptimize(fit_null(h, spec.family(), spec.fitting_interval));
}
BENCHMARK(BM_FitNull);

void BM_EstimateFdr(benchmark::State& state) {
    const ScenarioSpec spec = normal_preset();
    const Sample s = sample_scenario(spec, 0);
    const Histogram h = build_histogram(s.stats, spec.width, spec.hist_range);
    const NullFit f = fit_null(h, spec.family(), spec.fitting_interval);
    for (auto _ : state) benchmark::DoNotOptimize(estimate_fdr(h, f));
}
BENCHMARK(BM_EstimateFdr);

void BM_Replication(benchmark::State& state) {
    const ScenarioSpec spec = state.range(0) == 0 ? normal_preset() : chisq_preset();
    StudyConfig cfg;
    std::size_t rep = 0;
    for (auto _ : state) benchmark::DoNotOptimize(run_replication(spec, cfg, rep++));
}
BENCHMARK(BM_Replication)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace
