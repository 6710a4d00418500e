#ifndef TNSGA_CONFIG_HPP
#define TNSGA_CONFIG_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "tnsga/engine.hpp"

namespace tnsga {

// Grid of run configurations crossed with seeds.
struct ExperimentPlan {
    std::vector<RunConfig> cells;      // one per grid point; seeds are applied on top
    std::vector<std::uint64_t> seeds;  // empty: base seed + 0 .. repetitions - 1
    Index repetitions = 1;
    double time_limit = 0.0;           // seconds per cell; 0 disables
    std::string output;
    bool timing = false;               // run cells one at a time
    std::string snapshot_dir;          // final population per (cell, seed) when set
    std::ostream* trace = nullptr;     // niche selection trace; forces sequential execution

    void validate() const;
    [[nodiscard]] auto resolved_seeds() const -> std::vector<std::uint64_t>;
};

// JSON documents. Unknown keys are rejected with the offending path.
[[nodiscard]] auto parse_run_config(std::string_view json_text) -> RunConfig;
[[nodiscard]] auto parse_plan(std::string_view json_text) -> ExperimentPlan;
[[nodiscard]] auto load_plan(std::string const& path) -> ExperimentPlan;

// Canonical JSON of a configuration, with every default made explicit.
[[nodiscard]] auto to_json_string(RunConfig const& cfg, bool include_seed = true) -> std::string;

// 16 hex digits of FNV-1a over the canonical JSON without the seed, so
// replicates of one configuration share a fingerprint.
[[nodiscard]] auto fingerprint(RunConfig const& cfg) -> std::string;

} // namespace tnsga

#endif
