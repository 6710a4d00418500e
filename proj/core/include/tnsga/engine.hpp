#ifndef TNSGA_ENGINE_HPP
#define TNSGA_ENGINE_HPP

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "tnsga/batchcore.hpp"
#include "tnsga/dominance.hpp"
#include "tnsga/niche.hpp"
#include "tnsga/problems.hpp"
#include "tnsga/refpoints.hpp"
#include "tnsga/variation.hpp"

namespace tnsga {

enum class Backend { Batched, Oracle };

[[nodiscard]] auto to_string(Backend b) -> std::string_view;
[[nodiscard]] auto parse_backend(std::string_view name) -> Backend;

struct ProblemConfig {
    std::string kind = "dtlz2"; // dtlz2 | dtlz3 | dtlz5 | dtlz7 | mnk | knapsack
    int objectives = 3;
    int variables = 12;         // DTLZ decision variables, MNK bits, knapsack items
    int epistasis = 2;          // MNK only
    std::uint64_t instance_seed = 1;

    [[nodiscard]] auto build() const -> Problem;
};

struct MetricSchedule {
    Index every = 1;            // 0 records metrics on the final generation only
    bool igd = true;            // when the problem has a closed-form front
    Index igd_points = 10'000;
    bool hv = true;
    Index hv_samples = 1'000'000;

    [[nodiscard]] auto due(Index generation, Index last) const noexcept -> bool
    {
        return generation == last || (every != 0 && generation % every == 0);
    }
};

struct RunConfig {
    ProblemConfig problem;
    Index population = 92;
    Index generations = 100;
    std::uint64_t seed = 1;
    Backend backend = Backend::Batched;
    VariationConfig variation;               // empty bounds take the problem's box
    std::optional<LatticeParams> divisions;  // unset: largest lattice not exceeding the population
    DistanceForm distance = DistanceForm::Perpendicular;
    MetricSchedule metrics;
    bool verify_counts = false;

    // Throws ConfigError naming the offending field.
    void validate() const;
};

struct PhaseTimes {
    double variation = 0.0;
    double sort = 0.0;
    double niche = 0.0;
    double evaluation = 0.0;

    [[nodiscard]] auto total() const noexcept -> double { return variation + sort + niche + evaluation; }
    auto operator+=(PhaseTimes const& o) noexcept -> PhaseTimes&
    {
        variation += o.variation;
        sort += o.sort;
        niche += o.niche;
        evaluation += o.evaluation;
        return *this;
    }
};

struct RunState {
    Index generation = 0;
    Matrix population;          // n x d
    Matrix objectives;          // n x m, row-aligned with population
    RankVector ranks;           // front index of each member from the last sort
    Eigen::RowVectorXd ideal;   // running minimum, persists across generations
    CounterRng rng{0};
    PhaseTimes elapsed;         // cumulative
    Index evaluations = 0;
};

struct GenerationRecord {
    Index generation = 0;
    Index evaluations = 0;
    std::optional<double> igd;
    PhaseTimes time;
    bool niche_skipped = false;
    Index loop_iterations = 0;
};

struct RunHistory {
    std::vector<GenerationRecord> records;
    Matrix population;
    Matrix objectives;
    Index reference_points = 0;
};

class Engine {
public:
    explicit Engine(RunConfig config);

    [[nodiscard]] auto initialize() const -> RunState;
    auto step(RunState& state) const -> GenerationRecord;

    // Called after every generation with the new state; may fill extra fields.
    using Observer = std::function<void(RunState const&, GenerationRecord&)>;
    [[nodiscard]] auto run(Observer const& observer = {}) const -> RunHistory;

    // Runs until `stop()` returns true or all generations are done.
    [[nodiscard]] auto run_until(std::function<bool()> const& stop, Observer const& observer = {}) const
        -> RunHistory;

    [[nodiscard]] auto config() const noexcept -> RunConfig const& { return config_; }
    [[nodiscard]] auto problem() const noexcept -> Problem const& { return problem_; }
    [[nodiscard]] auto references() const noexcept -> ReferencePointSet const& { return refs_; }
    [[nodiscard]] auto reference_front() const -> Matrix const&;

    // Line-delimited niche selection records (batched backend only).
    void set_trace(std::ostream* trace) noexcept { trace_ = trace; }

private:
    RunConfig config_;
    Problem problem_;
    ReferencePointSet refs_;
    mutable std::optional<Matrix> front_;
    std::ostream* trace_ = nullptr;
};

[[nodiscard]] auto initialize(RunConfig const& config) -> RunState;
auto step(RunState& state, RunConfig const& config) -> GenerationRecord;
[[nodiscard]] auto run(RunConfig const& config) -> RunHistory;

// Binary dump of a population: magic "TNSG", version, rows, columns of both
// matrices, then little-endian doubles.
void write_snapshot(std::string const& path, Matrix const& population, Matrix const& objectives);
[[nodiscard]] auto read_snapshot(std::string const& path) -> std::pair<Matrix, Matrix>;

} // namespace tnsga

#endif
