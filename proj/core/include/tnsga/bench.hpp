#ifndef TNSGA_BENCH_HPP
#define TNSGA_BENCH_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "tnsga/config.hpp"
#include "tnsga/engine.hpp"

namespace tnsga {

inline constexpr char const* kWorkersEnv = "TNSGA_WORKERS";

struct ResultRow {
    std::string fingerprint;
    std::uint64_t seed = 0;
    Index generation = 0;
    std::optional<double> igd;
    std::optional<double> hv_raw;
    std::optional<double> hv_normalized;
    PhaseTimes time;
    bool timed_out = false;
};

struct CellFailure {
    std::string fingerprint;
    std::uint64_t seed = 0;
    std::string message;
};

struct PlanReport {
    std::vector<ResultRow> rows; // grouped by cell, then seed, then generation
    std::vector<CellFailure> failures;
    Index timed_out_cells = 0;
};

// Worker count after applying the TNSGA_WORKERS cap; never below 1.
[[nodiscard]] auto worker_count(Index requested = 0) -> Index;

// Runs every (cell, seed) pair. Rows are ordered independently of scheduling.
// When plan.output is set the CSV is written atomically next to a
// `<output>.meta.json` sidecar holding the resolved configurations.
[[nodiscard]] auto run_plan(ExperimentPlan const& plan) -> PlanReport;

void write_results_csv(std::ostream& out, std::vector<ResultRow> const& rows);
// Temp file plus rename; the temp file is removed on failure.
void write_results_csv(std::string const& path, std::vector<ResultRow> const& rows);
// Throws ParseError carrying the 1-based line number.
[[nodiscard]] auto read_results_csv(std::istream& in) -> std::vector<ResultRow>;
[[nodiscard]] auto read_results_csv(std::string const& path) -> std::vector<ResultRow>;

struct Stat {
    Index count = 0;
    double mean = 0.0;
    double sd = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
};

// Mean, sample standard deviation and two-sided t interval. A single value
// gives sd 0 and a zero-width interval; no values give count 0 and NaNs.
[[nodiscard]] auto describe(std::vector<double> const& values, double level = 0.95) -> Stat;

struct SummaryRow {
    std::string fingerprint;
    Index runs = 0;
    Stat igd;
    Stat hv_raw;
    Stat hv_normalized;
    Stat generation_time; // per-run mean seconds per generation, warm-up excluded
};

[[nodiscard]] auto summarize(std::vector<ResultRow> const& rows) -> std::vector<SummaryRow>;
void write_summary_csv(std::ostream& out, std::vector<SummaryRow> const& summary);

// Mean per-generation phase times, skipping the first generation when more
// than one is present.
[[nodiscard]] auto steady_state_times(std::vector<GenerationRecord> const& records) -> PhaseTimes;

struct SpeedupRow {
    Index population = 0;
    PhaseTimes batched;
    PhaseTimes oracle;
    double niche_speedup = 0.0; // oracle niche time / batched niche time
    double total_speedup = 0.0;
};

// Both backends on seeds base.seed .. base.seed + reps - 1 for each size.
// Metrics are switched off so only the generation loop is timed.
[[nodiscard]] auto compare_backends(RunConfig base, std::vector<Index> const& sizes, Index reps)
    -> std::vector<SpeedupRow>;
void write_speedup_csv(std::ostream& out, std::vector<SpeedupRow> const& rows);

} // namespace tnsga

#endif
