// Naive vs joint match counting, and serial vs OpenMP rolling SampEn.

#include <benchmark/benchmark.h>

#include "entrovol/entropy.hpp"
#include "entrovol/series.hpp"
#include "support/synthetic.hpp"

using namespace entrovol;

namespace {

const DatedSeries& returns() {
    static const DatedSeries r = series::log_returns(testing::synthetic_prices(9389, 7));
    return r;
}

void BM_CountNaive(benchmark::State& state) {
    const auto w = series::values_of(std::span(returns()).first(static_cast<std::size_t>(state.range(0))));
    const double r = 0.2 * series::sample_std(w);
    for (auto _ : state) benchmark::DoNotOptimize(entropy::count_matches_naive(w, 2, r));
}

void BM_CountJoint(benchmark::State& state) {
    const auto w = series::values_of(std::span(returns()).first(static_cast<std::size_t>(state.range(0))));
    const double r = 0.2 * series::sample_std(w);
    for (auto _ : state) benchmark::DoNotOptimize(entropy::count_matches(w, 2, r));
}

void BM_RollingSampEn(benchmark::State& state) {
    const auto exec = state.range(0) ? series::Execution::Parallel : series::Execution::Serial;
    for (auto _ : state) {
        benchmark::DoNotOptimize(entropy::rolling_sample_entropy(returns(), {}, {}, exec));
    }
    state.SetLabel(state.range(0) ? "parallel" : "serial");
}

void BM_RollingStd(benchmark::State& state) {
    for (auto _ : state) benchmark::DoNotOptimize(series::rolling_std(returns(), {}));
}

}  // namespace

BENCHMARK(BM_CountNaive)->Arg(64)->Arg(252)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_CountJoint)->Arg(64)->Arg(252)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_RollingSampEn)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_RollingStd)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
