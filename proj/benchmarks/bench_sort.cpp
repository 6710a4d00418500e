#include <benchmark/benchmark.h>

#include "tnsga/batchcore.hpp"
#include "tnsga/dominance.hpp"

namespace {

auto random_objectives(tnsga::Index n, int m) -> tnsga::Matrix
{
    tnsga::CounterRng rng{17};
    tnsga::Matrix f(static_cast<Eigen::Index>(n), m);
    for (Eigen::Index i = 0; i < f.size(); ++i) {
        f.data()[i] = rng.uniform();
    }
    return f;
}

void BM_NonDominatedSort(benchmark::State& state)
{
    auto const n = static_cast<tnsga::Index>(state.range(0));
    tnsga::MaskedMatrix const f{random_objectives(n, static_cast<int>(state.range(1)))};
    for (auto _ : state) {
        benchmark::DoNotOptimize(tnsga::non_dominated_sort(f));
    }
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_NonDominatedSort)->ArgsProduct({{100, 400, 1600, 6400}, {3, 8}})->Unit(benchmark::kMillisecond);

void BM_DominatorBits(benchmark::State& state)
{
    tnsga::MaskedMatrix const f{random_objectives(static_cast<tnsga::Index>(state.range(0)), 3)};
    for (auto _ : state) {
        benchmark::DoNotOptimize(tnsga::dominator_bits(f));
    }
}
BENCHMARK(BM_DominatorBits)->RangeMultiplier(4)->Range(64, 4096)->Unit(benchmark::kMicrosecond);

} // namespace
