#include <benchmark/benchmark.h>

#include "tnsga/dominance.hpp"
#include "tnsga/engine.hpp"
#include "tnsga/niche.hpp"
#include "tnsga/refpoints.hpp"

namespace {

// A merged population of 2n DTLZ2-like points after one generation of the
// engine, so front structure and niche occupancy are realistic.
struct Fixture {
    tnsga::MaskedMatrix normalized;
    tnsga::Matrix refs;
    tnsga::RankVector ranks;
    tnsga::FrontSplit split;
    tnsga::Index n = 0;

    explicit Fixture(tnsga::Index population)
        : n(population)
    {
        tnsga::RunConfig cfg;
        cfg.population = 2 * population;
        cfg.generations = 5;
        cfg.metrics.igd = false;
        cfg.metrics.hv = false;
        auto const history = tnsga::Engine{cfg}.run();
        refs = tnsga::make_reference_points(3, tnsga::choose_divisions(3, population)).points;
        ranks = tnsga::non_dominated_sort(tnsga::MaskedMatrix{history.objectives});
        split = tnsga::split_fronts(ranks, n);
        tnsga::Mask valid(ranks.size());
        for (tnsga::Index i = 0; i < ranks.size(); ++i) {
            valid[i] = ranks[i] <= split.l ? 1 : 0;
        }
        Eigen::RowVectorXd ideal = Eigen::RowVectorXd::Constant(3, std::numeric_limits<double>::infinity());
        normalized = tnsga::normalize_objectives(tnsga::MaskedMatrix{history.objectives, valid}, ideal);
    }
};

void BM_BatchedNiche(benchmark::State& state)
{
    Fixture const fx(static_cast<tnsga::Index>(state.range(0)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(tnsga::batched_niche_select(fx.normalized, fx.refs, fx.ranks, fx.split, fx.n));
    }
}
BENCHMARK(BM_BatchedNiche)->RangeMultiplier(2)->Range(200, 3200)->Unit(benchmark::kMillisecond);

void BM_OracleNiche(benchmark::State& state)
{
    Fixture const fx(static_cast<tnsga::Index>(state.range(0)));
    tnsga::CounterRng rng{3};
    for (auto _ : state) {
        benchmark::DoNotOptimize(tnsga::oracle_niche_select(fx.normalized, fx.refs, fx.ranks, fx.split, fx.n, rng));
    }
}
BENCHMARK(BM_OracleNiche)->RangeMultiplier(2)->Range(200, 3200)->Unit(benchmark::kMillisecond);

void BM_DistanceMatrix(benchmark::State& state)
{
    Fixture const fx(static_cast<tnsga::Index>(state.range(0)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(tnsga::perpendicular_distance_matrix(fx.normalized.data(), fx.refs));
    }
}
BENCHMARK(BM_DistanceMatrix)->RangeMultiplier(4)->Range(200, 3200)->Unit(benchmark::kMicrosecond);

} // namespace
