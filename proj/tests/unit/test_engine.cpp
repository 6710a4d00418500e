#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "niche_instances.hpp"
#include "oracles.hpp"
#include "tnsga/engine.hpp"
#include "tnsga/errors.hpp"

using namespace tnsga;

namespace {

auto dtlz2(int m, int d, Index n, Index generations) -> RunConfig
{
    RunConfig cfg;
    cfg.problem.kind = "dtlz2";
    cfg.problem.objectives = m;
    cfg.problem.variables = d;
    cfg.population = n;
    cfg.generations = generations;
    cfg.metrics.igd_points = 2000;
    return cfg;
}

auto frozen(RunConfig cfg) -> RunConfig
{
    cfg.variation.p_c = 0.0;
    cfg.variation.p_m = 0.0;
    return cfg;
}

auto sorted_rows(Matrix const& m) -> std::vector<std::vector<double>>
{
    std::vector<std::vector<double>> out;
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        out.emplace_back(m.row(r).begin(), m.row(r).end());
    }
    std::sort(out.begin(), out.end());
    return out;
}

// Ten points, one on each direction of the H = 9 lattice for m = 2.
auto on_lattice(Engine const& engine) -> RunState
{
    auto state = engine.initialize();
    for (Eigen::Index i = 0; i < 10; ++i) {
        auto const x0 = 2.0 * std::atan2(static_cast<double>(i), static_cast<double>(9 - i)) / std::numbers::pi;
        state.population(i, 0) = x0;
        for (Eigen::Index c = 1; c < state.population.cols(); ++c) {
            state.population(i, c) = 0.5;
        }
    }
    state.objectives = engine.problem().evaluate(state.population);
    state.ranks = non_dominated_sort(MaskedMatrix{state.objectives});
    return state;
}

} // namespace

TEST_CASE("initialize")
{
    auto cfg = dtlz2(2, 2, 4, 1);
    auto const s = initialize(cfg);
    CHECK(s.population.rows() == 4);
    CHECK(s.population.cols() == 2);
    CHECK(s.population.minCoeff() >= 0.0);
    CHECK(s.population.maxCoeff() <= 1.0);
    CHECK(s.objectives.rows() == 4);
    CHECK(s.generation == 0);
    CHECK(s.evaluations == 4);
    CHECK(initialize(cfg).population == s.population);

    cfg.seed = 2;
    CHECK(initialize(cfg).population != s.population);

    RunConfig bin;
    bin.problem.kind = "mnk";
    bin.problem.objectives = 2;
    bin.problem.variables = 12;
    bin.population = 8;
    auto const b = initialize(bin);
    CHECK((b.population.array() * (1.0 - b.population.array()) == 0.0).all());
}

TEST_CASE("configuration errors name the field")
{
    auto field_of = [](RunConfig const& c) -> std::string {
        try {
            c.validate();
        } catch (ConfigError const& e) {
            return e.field();
        }
        return "";
    };
    auto cfg = dtlz2(3, 12, 92, 10);
    CHECK(field_of(cfg).empty());
    auto c = cfg;
    c.population = 91;
    CHECK(field_of(c) == "population");
    c = cfg;
    c.population = 2;
    CHECK(field_of(c) == "population");
    c = cfg;
    c.generations = 0;
    CHECK(field_of(c) == "generations");
    c = cfg;
    c.problem.variables = 2;
    CHECK(field_of(c) == "problem.variables");
    c = cfg;
    c.variation.eta_m = -1.0;
    CHECK(field_of(c) == "variation.eta_m");
    c = cfg;
    c.problem.kind = "zdt1";
    CHECK(field_of(c) == "problem.kind");
    CHECK_THROWS_AS((void)parse_backend("gpu"), ConfigError);
}

TEST_CASE("zero variation on copies of one optimal point changes nothing")
{
    auto cfg = frozen(dtlz2(3, 7, 12, 3));
    Engine const engine{cfg};
    auto state = engine.initialize();
    for (Eigen::Index r = 0; r < state.population.rows(); ++r) {
        state.population.row(r) << 0.3, 0.6, 0.5, 0.5, 0.5, 0.5, 0.5;
    }
    state.objectives = engine.problem().evaluate(state.population);
    state.ranks = non_dominated_sort(MaskedMatrix{state.objectives});
    auto const before = state.population;
    for (int g = 0; g < 3; ++g) {
        engine.step(state);
        CHECK(state.population == before);
    }
}

TEST_CASE("fronts that fill the budget exactly skip niching")
{
    // ten points along one ray with growing g: a strict chain, so the merged
    // population has fronts of two copies each and n = 10 is met exactly
    auto cfg = frozen(dtlz2(2, 4, 10, 1));
    Engine const engine{cfg};
    auto state = engine.initialize();
    for (Eigen::Index r = 0; r < 10; ++r) {
        state.population.row(r) << 0.3, 0.5 + 0.04 * static_cast<double>(r), 0.5, 0.5;
    }
    state.objectives = engine.problem().evaluate(state.population);
    state.ranks = non_dominated_sort(MaskedMatrix{state.objectives});
    auto const rec = engine.step(state);
    CHECK(rec.niche_skipped);
    CHECK(rec.loop_iterations == 0);
    // the best five distinct points survive, twice each
    auto const rows = sorted_rows(state.population);
    for (Eigen::Index r = 0; r < 5; ++r) {
        auto const g = 0.5 + 0.04 * static_cast<double>(r);
        CHECK(std::count_if(rows.begin(), rows.end(), [&](auto const& v) { return std::abs(v[1] - g) < 1e-15; }) == 2);
    }
}

TEST_CASE("forced-choice generation: batched and oracle agree")
{
    auto cfg = frozen(dtlz2(2, 5, 10, 1));
    cfg.divisions = LatticeParams{9, 0};
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        cfg.seed = seed;
        cfg.backend = Backend::Batched;
        Engine const batched{cfg};
        cfg.backend = Backend::Oracle;
        Engine const oracle{cfg};
        auto a = on_lattice(batched);
        auto b = on_lattice(oracle);
        auto const ra = batched.step(a);
        auto const rb = oracle.step(b);
        CHECK_FALSE(ra.niche_skipped);
        CHECK_FALSE(rb.niche_skipped);
        CHECK(sorted_rows(a.population) == sorted_rows(b.population));
        CHECK(sorted_rows(a.population) == sorted_rows(on_lattice(batched).population));
    }
}

TEST_CASE("run bookkeeping")
{
    auto cfg = dtlz2(3, 8, 20, 1);
    CHECK(run(cfg).records.size() == 1);

    cfg.generations = 6;
    cfg.metrics.every = 2;
    Engine const engine{cfg};
    Index observed = 0;
    auto const h = engine.run([&](RunState const& s, GenerationRecord&) {
        CHECK(s.population.rows() == 20);
        CHECK(s.objectives.rows() == 20);
        CHECK(s.ideal.size() == 3);
        ++observed;
    });
    CHECK(observed == 6);
    REQUIRE(h.records.size() == 6);
    for (auto const& r : h.records) {
        CHECK(r.evaluations == 20 * (r.generation + 1));
        CHECK(r.igd.has_value() == (r.generation % 2 == 0));
        CHECK(r.time.total() >= 0.0);
    }
    CHECK(h.reference_points == make_reference_points(3, choose_divisions(3, 20)).size());

    auto const again = engine.run();
    CHECK(again.population == h.population);
    for (Index g = 0; g < 6; ++g) {
        CHECK(again.records[g].igd == h.records[g].igd);
    }

    Index calls = 0;
    // stop() is consulted after each generation, so the fourth one still runs.
    auto const partial = engine.run_until([&] { return ++calls > 3; });
    CHECK(partial.records.size() == 4);
}

TEST_CASE("every problem kind runs under both backends")
{
    for (std::string kind : {"dtlz2", "dtlz3", "dtlz5", "dtlz7", "mnk", "knapsack"}) {
        for (auto backend : {Backend::Batched, Backend::Oracle}) {
            RunConfig cfg;
            cfg.problem.kind = kind;
            cfg.problem.objectives = 3;
            cfg.problem.variables = 10;
            cfg.population = 16;
            cfg.generations = 4;
            cfg.backend = backend;
            cfg.verify_counts = true;
            cfg.metrics.igd_points = 500;
            auto const h = run(cfg);
            CHECK(h.population.rows() == 16);
            CHECK(h.records.back().igd.has_value() == (kind.rfind("dtlz", 0) == 0));
        }
    }
}

TEST_CASE("the ideal point persists and only decreases")
{
    auto cfg = dtlz2(3, 12, 20, 5);
    Engine const engine{cfg};
    auto state = engine.initialize();
    auto prev = state.ideal;
    for (int g = 0; g < 5; ++g) {
        engine.step(state);
        CHECK((state.ideal.array() <= prev.array()).all());
        CHECK((state.ideal.array() <= state.objectives.colwise().minCoeff().array()).all());
        prev = state.ideal;
    }
}

TEST_CASE("unique front-0 niche occupants survive")
{
    // with w <= n and the whole budget on front 0, every niche holding one
    // front-0 member is empty before nearest selection and gets filled
    CounterRng rng{88};
    int checked = 0;
    while (checked < 200) {
        auto inst = testing::random_niche_instance(rng, {32, 10, 3});
        if (inst.split.l != 0 || static_cast<Index>(inst.refs.rows()) > inst.n) {
            continue;
        }
        ++checked;
        std::vector<Index> occupants(static_cast<Index>(inst.refs.rows()), 0);
        std::vector<Index> last(static_cast<Index>(inst.refs.rows()), 0);
        for (Index i = 0; i < inst.ranks.size(); ++i) {
            if (inst.ranks[i] == 0) {
                auto const p = testing::nearest_reference(inst, i);
                ++occupants[p];
                last[p] = i;
            }
        }
        auto const sel = testing::batched_trial(inst, rng).selected;
        for (Index j = 0; j < occupants.size(); ++j) {
            if (occupants[j] == 1) {
                CHECK(((sel >> last[j]) & 1U) == 1U);
            }
        }
    }
}

TEST_CASE("DTLZ2 converges")
{
    // Oracle backend, five seeds, generation 200: median final IGD 0.0775 on
    // a 1e4-point front sample. The bound is 1.5 times that median.
    constexpr double kOracleMedian = 0.0775;
    constexpr double kBound = 1.5 * kOracleMedian;
    auto cfg = dtlz2(3, 12, 92, 200);
    cfg.metrics.every = 0;
    cfg.metrics.igd_points = 10'000;
    std::vector<double> finals;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        cfg.seed = seed;
        finals.push_back(*run(cfg).records.back().igd);
    }
    MESSAGE("batched median final IGD " << testing::median(finals));
    CHECK(testing::median(finals) < kBound);
    CHECK(*std::max_element(finals.begin(), finals.end()) < kBound);
}

TEST_CASE("backends give indistinguishable IGD on DTLZ2")
{
    auto cfg = dtlz2(3, 12, 92, 60);
    cfg.metrics.every = 30;
    std::vector<double> mid_a;
    std::vector<double> mid_b;
    std::vector<double> end_a;
    std::vector<double> end_b;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        cfg.seed = seed;
        cfg.backend = Backend::Batched;
        auto const a = run(cfg);
        cfg.backend = Backend::Oracle;
        auto const b = run(cfg);
        mid_a.push_back(*a.records[29].igd);
        mid_b.push_back(*b.records[29].igd);
        end_a.push_back(*a.records.back().igd);
        end_b.push_back(*b.records.back().igd);
    }
    CHECK(testing::mann_whitney_p(mid_a, mid_b) > 0.01);
    CHECK(testing::mann_whitney_p(end_a, end_b) > 0.01);
}

TEST_CASE("snapshots round-trip")
{
    auto const dir = std::filesystem::temp_directory_path() / "tnsga_snapshot_test";
    std::filesystem::create_directories(dir);
    auto const path = (dir / "pop.snap").string();
    auto const h = run(dtlz2(3, 6, 12, 2));
    write_snapshot(path, h.population, h.objectives);
    auto const [x, f] = read_snapshot(path);
    CHECK(x == h.population);
    CHECK(f == h.objectives);

    {
        std::ofstream bad(path, std::ios::binary | std::ios::trunc);
        bad << "NOPE0000";
    }
    CHECK_THROWS_AS((void)read_snapshot(path), IoError);
    {
        std::ofstream cut(path, std::ios::binary | std::ios::trunc);
        cut << "TNSG";
    }
    CHECK_THROWS_AS((void)read_snapshot(path), IoError);
    CHECK_THROWS_AS((void)read_snapshot((dir / "absent.snap").string()), IoError);
    std::filesystem::remove_all(dir);
}
