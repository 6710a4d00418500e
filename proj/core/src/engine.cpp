#include "tnsga/engine.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <chrono>
#include <cstring>
#include <fstream>

#include "tnsga/errors.hpp"
#include "tnsga/metrics.hpp"

namespace tnsga {

namespace {

constexpr std::uint64_t kEngineStream = 0x454e47;
constexpr std::uint64_t kVariationFork = 1;
constexpr std::uint64_t kShuffleFork = 2;
constexpr std::uint64_t kOracleFork = 3;

using Clock = std::chrono::steady_clock;

auto seconds_since(Clock::time_point start) -> double
{
    return std::chrono::duration<double>(Clock::now() - start).count();
}

auto take_rows(Matrix const& m, std::span<Index const> rows) -> Matrix
{
    return permute_rows(m, rows);
}

auto stack(Matrix const& top, Matrix const& bottom) -> Matrix
{
    Matrix out(top.rows() + bottom.rows(), top.cols());
    out.topRows(top.rows()) = top;
    out.bottomRows(bottom.rows()) = bottom;
    return out;
}

void update_ideal(Eigen::RowVectorXd& ideal, Matrix const& f)
{
    Eigen::RowVectorXd const lo = f.colwise().minCoeff();
    ideal = ideal.size() == 0 ? lo : ideal.cwiseMin(lo);
}

auto resolved_variation(RunConfig const& cfg, Problem const& problem) -> VariationConfig
{
    auto v = cfg.variation;
    auto const d = problem.variables();
    if (v.lower.empty()) {
        v.lower.assign(d, 0.0);
    }
    if (v.upper.empty()) {
        v.upper.assign(d, 1.0);
    }
    return v;
}

} // namespace

auto to_string(Backend b) -> std::string_view
{
    return b == Backend::Batched ? "batched" : "oracle";
}

auto parse_backend(std::string_view name) -> Backend
{
    if (name == "batched") {
        return Backend::Batched;
    }
    if (name == "oracle") {
        return Backend::Oracle;
    }
    throw ConfigError("backend", "expected 'batched' or 'oracle', got '" + std::string(name) + "'");
}

auto ProblemConfig::build() const -> Problem
{
    if (kind == "mnk") {
        return Problem{generate_mnk(objectives, variables, epistasis, instance_seed)};
    }
    if (kind == "knapsack") {
        return Problem{generate_knapsack(objectives, variables, instance_seed)};
    }
    ContinuousProblem p{parse_dtlz_kind(kind), objectives, variables};
    p.validate();
    return Problem{p};
}

void RunConfig::validate() const
{
    auto const problem_handle = problem.build();
    auto const m = problem_handle.objectives();
    if (population < 2 || population % 2 != 0) {
        throw ConfigError("population", "must be even and at least 2");
    }
    if (population < m) {
        throw ConfigError("population", "must be at least the number of objectives");
    }
    if (generations < 1) {
        throw ConfigError("generations", "must be at least 1");
    }
    if (divisions && (divisions->outer < 1 || divisions->inner < 0)) {
        throw ConfigError("reference_points", "outer must be >= 1 and inner >= 0");
    }
    if (metrics.igd && metrics.igd_points == 0) {
        throw ConfigError("metrics.igd_points", "must be positive");
    }
    resolved_variation(*this, problem_handle).validate(problem_handle.variables());
}

Engine::Engine(RunConfig config) : config_(std::move(config))
{
    config_.validate();
    problem_ = config_.problem.build();
    config_.variation = resolved_variation(config_, problem_);
    auto const m = static_cast<int>(problem_.objectives());
    if (!config_.divisions) {
        config_.divisions = choose_divisions(m, config_.population);
    }
    refs_ = make_reference_points(m, *config_.divisions);
}

auto Engine::reference_front() const -> Matrix const&
{
    if (!front_) {
        front_ = problem_.reference_front(config_.metrics.igd_points);
    }
    return *front_;
}

auto Engine::initialize() const -> RunState
{
    RunState state;
    state.rng = CounterRng{config_.seed, kEngineStream};
    auto init = state.rng.fork(0);
    auto const n = static_cast<Eigen::Index>(config_.population);
    auto const d = static_cast<Eigen::Index>(problem_.variables());
    state.population.resize(n, d);
    for (Eigen::Index r = 0; r < n; ++r) {
        for (Eigen::Index c = 0; c < d; ++c) {
            if (problem_.binary()) {
                state.population(r, c) = static_cast<double>(init.below(2));
            } else {
                auto const lo = config_.variation.lower[static_cast<Index>(c)];
                auto const hi = config_.variation.upper[static_cast<Index>(c)];
                state.population(r, c) = lo + init.uniform() * (hi - lo);
            }
        }
    }
    state.objectives = problem_.evaluate(state.population);
    state.evaluations = config_.population;
    state.ranks = non_dominated_sort(MaskedMatrix{state.objectives});
    update_ideal(state.ideal, state.objectives);
    return state;
}

auto Engine::step(RunState& state) const -> GenerationRecord
{
    GenerationRecord rec;
    auto const n = config_.population;
    auto const gen_rng = state.rng.fork(state.generation + 1);

    auto t = Clock::now();
    auto var_rng = gen_rng.fork(kVariationFork);
    auto offspring = make_offspring(state.population, state.ranks, config_.variation, problem_.binary(), var_rng);
    rec.time.variation = seconds_since(t);

    t = Clock::now();
    Matrix const off_obj = problem_.evaluate(offspring);
    rec.time.evaluation = seconds_since(t);

    Matrix const merged_x = stack(state.population, offspring);
    Matrix const merged_f = stack(state.objectives, off_obj);

    t = Clock::now();
    auto ranks = non_dominated_sort(MaskedMatrix{merged_f});
    auto const split = split_fronts(ranks, n);
    rec.time.sort = seconds_since(t);

    t = Clock::now();
    update_ideal(state.ideal, merged_f);
    std::vector<Index> survivors;
    survivors.reserve(n);
    if (split.fills_exactly()) {
        rec.niche_skipped = true;
        for (Index i = 0; i < ranks.size(); ++i) {
            if (ranks[i] <= split.l) {
                survivors.push_back(i);
            }
        }
    } else {
        auto shuffle_rng = gen_rng.fork(kShuffleFork);
        auto const perm = random_permutation(ranks.size(), shuffle_rng);
        auto const ref_perm = random_permutation(refs_.size(), shuffle_rng);
        Matrix const refs = permute_rows(refs_.points, ref_perm);
        RankVector shuffled_ranks;
        shuffled_ranks.ranks.resize(ranks.size());
        Mask relevant(ranks.size(), 0);
        for (Index i = 0; i < perm.size(); ++i) {
            shuffled_ranks[i] = ranks[perm[i]];
            relevant[i] = shuffled_ranks[i] <= split.l ? 1 : 0;
        }
        MaskedMatrix const objectives{permute_rows(merged_f, perm), relevant};
        auto const normalized = normalize_objectives(objectives, state.ideal);

        if (config_.backend == Backend::Batched) {
            NicheOptions opts;
            opts.form = config_.distance;
            opts.verify_counts = config_.verify_counts;
            opts.trace = trace_;
            auto const result = batched_niche_select(normalized, refs, shuffled_ranks, split, n, opts);
            rec.loop_iterations = result.loop_iterations;
            for (Index i = 0; i < perm.size(); ++i) {
                if (result.ranks[i] < split.l) {
                    survivors.push_back(perm[i]);
                }
            }
        } else {
            auto oracle_rng = gen_rng.fork(kOracleFork);
            auto const chosen =
                oracle_niche_select(normalized, refs, shuffled_ranks, split, n, oracle_rng, config_.distance);
            for (auto const i : chosen) {
                survivors.push_back(perm[i]);
            }
        }
        std::sort(survivors.begin(), survivors.end());
    }
    rec.time.niche = seconds_since(t);

    if (survivors.size() != n) {
        throw InfeasibleError("environmental selection returned " + std::to_string(survivors.size()) +
                              " survivors, expected " + std::to_string(n));
    }

    state.population = take_rows(merged_x, survivors);
    state.objectives = take_rows(merged_f, survivors);
    RankVector next;
    next.ranks.reserve(n);
    for (auto const i : survivors) {
        next.ranks.push_back(ranks[i]);
    }
    state.ranks = std::move(next);
    state.evaluations += n;
    state.generation += 1;
    state.elapsed += rec.time;

    rec.generation = state.generation;
    rec.evaluations = state.evaluations;
    if (config_.metrics.igd && problem_.has_reference_front() &&
        config_.metrics.due(state.generation, config_.generations)) {
        rec.igd = igd(nondominated_rows(state.objectives), reference_front());
    }
    return rec;
}

auto Engine::run(Observer const& observer) const -> RunHistory
{
    return run_until([] { return false; }, observer);
}

auto Engine::run_until(std::function<bool()> const& stop, Observer const& observer) const -> RunHistory
{
    RunHistory history;
    history.reference_points = refs_.size();
    auto state = initialize();
    history.records.reserve(config_.generations);
    while (state.generation < config_.generations) {
        auto rec = step(state);
        if (observer) {
            observer(state, rec);
        }
        history.records.push_back(rec);
        if (stop()) {
            break;
        }
    }
    history.population = std::move(state.population);
    history.objectives = std::move(state.objectives);
    return history;
}

auto initialize(RunConfig const& config) -> RunState
{
    return Engine{config}.initialize();
}

auto step(RunState& state, RunConfig const& config) -> GenerationRecord
{
    return Engine{config}.step(state);
}

auto run(RunConfig const& config) -> RunHistory
{
    return Engine{config}.run();
}

namespace {

constexpr std::array<char, 4> kMagic{'T', 'N', 'S', 'G'};
constexpr std::uint32_t kSnapshotVersion = 1;

void put_u64(std::ofstream& out, std::uint64_t v)
{
    std::array<unsigned char, 8> bytes{};
    for (int i = 0; i < 8; ++i) {
        bytes[static_cast<std::size_t>(i)] = static_cast<unsigned char>(v >> (8 * i));
    }
    out.write(reinterpret_cast<char const*>(bytes.data()), 8);
}

auto get_u64(std::ifstream& in) -> std::uint64_t
{
    std::array<unsigned char, 8> bytes{};
    in.read(reinterpret_cast<char*>(bytes.data()), 8);
    if (!in) {
        throw IoError("snapshot: truncated file");
    }
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) {
        v = (v << 8) | bytes[static_cast<std::size_t>(i)];
    }
    return v;
}

void put_matrix(std::ofstream& out, Matrix const& m)
{
    put_u64(out, static_cast<std::uint64_t>(m.rows()));
    put_u64(out, static_cast<std::uint64_t>(m.cols()));
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            put_u64(out, std::bit_cast<std::uint64_t>(m(r, c)));
        }
    }
}

auto get_matrix(std::ifstream& in) -> Matrix
{
    auto const rows = get_u64(in);
    auto const cols = get_u64(in);
    if (rows > (1ULL << 32) || cols > (1ULL << 20)) {
        throw IoError("snapshot: implausible dimensions");
    }
    Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            m(r, c) = std::bit_cast<double>(get_u64(in));
        }
    }
    return m;
}

} // namespace

void write_snapshot(std::string const& path, Matrix const& population, Matrix const& objectives)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("snapshot: cannot open '" + path + "' for writing");
    }
    out.write(kMagic.data(), kMagic.size());
    put_u64(out, kSnapshotVersion);
    put_matrix(out, population);
    put_matrix(out, objectives);
    if (!out) {
        throw IoError("snapshot: write to '" + path + "' failed");
    }
}

auto read_snapshot(std::string const& path) -> std::pair<Matrix, Matrix>
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("snapshot: cannot open '" + path + "'");
    }
    std::array<char, 4> magic{};
    in.read(magic.data(), magic.size());
    if (!in || magic != kMagic) {
        throw IoError("snapshot: bad magic in '" + path + "'");
    }
    if (get_u64(in) != kSnapshotVersion) {
        throw IoError("snapshot: unsupported version");
    }
    auto pop = get_matrix(in);
    auto obj = get_matrix(in);
    return {std::move(pop), std::move(obj)};
}

} // namespace tnsga
