#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tnsga/bench.hpp"
#include "tnsga/config.hpp"
#include "tnsga/errors.hpp"
#include "tnsga/refpoints.hpp"

namespace {

enum Exit : int {
    kOk = 0,
    kUnexpected = 1,
    kUsage = 2,
    kConfig = 3,
    kParse = 4,
    kIo = 5,
    kNumeric = 6,
    kCellFailures = 7,
};

struct RunArgs {
    std::string config;
    std::string out;
    std::vector<std::uint64_t> seeds;
    std::string backend;
    std::optional<double> time_limit;
    std::string snapshot_dir;
    std::string trace;
    bool timing = false;
};

struct CompareArgs {
    std::string config;
    std::vector<tnsga::Index> sizes{200, 400, 800};
    tnsga::Index reps = 3;
    std::optional<tnsga::Index> generations;
    std::string out;
};

struct RefArgs {
    int objectives = 3;
    int outer = 0;
    int inner = 0;
    tnsga::Index target = 0;
    std::string out;
};

// Writes to `path`, or stdout when it is empty or "-".
template <typename Fn>
void with_output(std::string const& path, Fn&& fn)
{
    if (path.empty() || path == "-") {
        fn(std::cout);
        return;
    }
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        throw tnsga::IoError("cannot open '" + path + "' for writing");
    }
    fn(out);
    if (!out) {
        throw tnsga::IoError("write to '" + path + "' failed");
    }
}

auto cmd_run(RunArgs const& args) -> int
{
    auto plan = tnsga::load_plan(args.config);
    if (!args.out.empty()) {
        plan.output = args.out;
    }
    if (plan.output.empty()) {
        throw tnsga::ConfigError("output", "no output path; pass --out or set \"output\"");
    }
    if (!args.seeds.empty()) {
        plan.seeds = args.seeds;
    }
    if (!args.backend.empty()) {
        auto const backend = tnsga::parse_backend(args.backend);
        for (auto& c : plan.cells) {
            c.backend = backend;
        }
    }
    if (args.time_limit) {
        plan.time_limit = *args.time_limit;
    }
    plan.snapshot_dir = args.snapshot_dir;
    plan.timing = plan.timing || args.timing;

    std::ofstream trace;
    if (!args.trace.empty()) {
        trace.open(args.trace, std::ios::trunc);
        if (!trace) {
            throw tnsga::IoError("cannot open trace file '" + args.trace + "'");
        }
        plan.trace = &trace;
    }

    auto const report = tnsga::run_plan(plan);
    std::cerr << report.rows.size() << " rows written to " << plan.output;
    if (report.timed_out_cells > 0) {
        std::cerr << ", " << report.timed_out_cells << " cell(s) timed out";
    }
    std::cerr << '\n';
    for (auto const& f : report.failures) {
        std::cerr << "cell " << f.fingerprint << " seed " << f.seed << " failed: " << f.message << '\n';
    }
    return report.failures.empty() ? kOk : kCellFailures;
}

auto cmd_summarize(std::string const& input, std::string const& out) -> int
{
    auto const summary = tnsga::summarize(tnsga::read_results_csv(input));
    with_output(out, [&](std::ostream& os) { tnsga::write_summary_csv(os, summary); });
    return kOk;
}

auto cmd_compare(CompareArgs const& args) -> int
{
    auto const plan = tnsga::load_plan(args.config);
    auto base = plan.cells.front();
    if (args.generations) {
        base.generations = *args.generations;
    }
    auto const rows = tnsga::compare_backends(base, args.sizes, args.reps);
    with_output(args.out, [&](std::ostream& os) { tnsga::write_speedup_csv(os, rows); });
    return kOk;
}

auto cmd_refpoints(RefArgs const& args) -> int
{
    tnsga::LatticeParams params{args.outer, args.inner};
    if (args.outer == 0) {
        if (args.target == 0) {
            throw tnsga::ConfigError("outer", "pass --outer or --target");
        }
        params = tnsga::choose_divisions(args.objectives, args.target);
    }
    auto const refs = tnsga::make_reference_points(args.objectives, params);
    with_output(args.out, [&](std::ostream& os) { tnsga::write_csv(os, refs); });
    return kOk;
}

auto cmd_instance(std::string const& config, std::string const& out) -> int
{
    auto const plan = tnsga::load_plan(config);
    auto const problem = plan.cells.front().problem.build();
    std::string text;
    if (auto const* mnk = std::get_if<tnsga::MnkInstance>(&problem.variant())) {
        text = tnsga::to_json_string(*mnk);
    } else if (auto const* ks = std::get_if<tnsga::KnapsackInstance>(&problem.variant())) {
        text = tnsga::to_json_string(*ks);
    } else {
        throw tnsga::ConfigError("problem.kind", "only mnk and knapsack instances can be exported");
    }
    with_output(out, [&](std::ostream& os) { os << text << '\n'; });
    return kOk;
}

} // namespace

auto main(int argc, char** argv) -> int
{
    CLI::App app{"Batched NSGA-III experiment harness"};
    app.require_subcommand(1);

    RunArgs run;
    auto* run_cmd = app.add_subcommand("run", "Run an experiment plan and write per-generation CSV");
    run_cmd->add_option("--config", run.config, "Plan or run configuration (JSON)")->required()->check(CLI::ExistingFile);
    run_cmd->add_option("--out", run.out, "Output CSV path");
    run_cmd->add_option("--seeds", run.seeds, "Seeds, comma separated")->delimiter(',');
    run_cmd->add_option("--backend", run.backend, "Selection backend: batched or oracle");
    run_cmd->add_option("--time-limit", run.time_limit, "Seconds per cell, 0 disables");
    run_cmd->add_option("--snapshot-dir", run.snapshot_dir, "Write final populations here")->check(CLI::ExistingDirectory);
    run_cmd->add_option("--trace", run.trace, "Line-delimited niche selection trace");
    run_cmd->add_flag("--timing", run.timing, "Run cells sequentially");

    std::string summarize_in;
    std::string summarize_out;
    auto* sum_cmd = app.add_subcommand("summarize", "Mean, sd and 95% t interval per configuration");
    sum_cmd->add_option("results", summarize_in, "Result CSV from `run`")->required()->check(CLI::ExistingFile);
    sum_cmd->add_option("--out", summarize_out, "Summary CSV (default stdout)");

    CompareArgs compare;
    auto* cmp_cmd = app.add_subcommand("compare", "Per-generation time of both backends across population sizes");
    cmp_cmd->add_option("--config", compare.config, "Run configuration (JSON)")->required()->check(CLI::ExistingFile);
    cmp_cmd->add_option("--sizes", compare.sizes, "Population sizes, comma separated")->delimiter(',');
    cmp_cmd->add_option("--reps", compare.reps, "Seeds per size")->check(CLI::PositiveNumber);
    cmp_cmd->add_option("--generations", compare.generations, "Override the configured generation count");
    cmp_cmd->add_option("--out", compare.out, "Speedup CSV (default stdout)");

    RefArgs refs;
    auto* ref_cmd = app.add_subcommand("refpoints", "Export a reference point set as CSV");
    ref_cmd->add_option("--objectives,-m", refs.objectives, "Number of objectives");
    ref_cmd->add_option("--outer", refs.outer, "Outer-layer divisions");
    ref_cmd->add_option("--inner", refs.inner, "Inner-layer divisions (0 for a single layer)");
    ref_cmd->add_option("--target", refs.target, "Pick divisions automatically for this many points");
    ref_cmd->add_option("--out", refs.out, "CSV path (default stdout)");

    std::string instance_config;
    std::string instance_out;
    auto* inst_cmd = app.add_subcommand("instance", "Export a generated MNK or knapsack instance as JSON");
    inst_cmd->add_option("--config", instance_config, "Run configuration (JSON)")->required()->check(CLI::ExistingFile);
    inst_cmd->add_option("--out", instance_out, "JSON path (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (CLI::ParseError const& e) {
        auto const code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (run_cmd->parsed()) {
            return cmd_run(run);
        }
        if (sum_cmd->parsed()) {
            return cmd_summarize(summarize_in, summarize_out);
        }
        if (cmp_cmd->parsed()) {
            return cmd_compare(compare);
        }
        if (ref_cmd->parsed()) {
            return cmd_refpoints(refs);
        }
        if (inst_cmd->parsed()) {
            return cmd_instance(instance_config, instance_out);
        }
    } catch (tnsga::ConfigError const& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfig;
    } catch (tnsga::ParseError const& e) {
        std::cerr << "parse error: " << e.what() << '\n';
        return kParse;
    } catch (tnsga::IoError const& e) {
        std::cerr << "i/o error: " << e.what() << '\n';
        return kIo;
    } catch (tnsga::ParameterError const& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfig;
    } catch (tnsga::InfeasibleError const& e) {
        std::cerr << "numeric error: " << e.what() << '\n';
        return kNumeric;
    } catch (tnsga::DomainError const& e) {
        std::cerr << "numeric error: " << e.what() << '\n';
        return kNumeric;
    } catch (std::exception const& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUnexpected;
    }
    return kUsage;
}
