#include "tnsga/bench.hpp"

#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include <boost/math/distributions/students_t.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "tnsga/errors.hpp"
#include "tnsga/metrics.hpp"

namespace tnsga {

namespace {

constexpr char const* kHeader =
    "fingerprint,seed,generation,igd,hv_raw,hv_normalized,t_variation,t_sort,t_niche,t_eval,timed_out";

struct Task {
    Index cell = 0;
    std::uint64_t seed = 0;
};

struct TaskOutput {
    std::vector<ResultRow> rows;
    std::vector<Matrix> fronts; // one per row; empty matrix when HV is not due
    std::optional<CellFailure> failure;
    bool timed_out = false;
};

auto problem_key(ProblemConfig const& p) -> std::string
{
    return fmt::format("{}/{}/{}/{}/{}", p.kind, p.objectives, p.variables, p.epistasis, p.instance_seed);
}

auto run_task(RunConfig cfg, std::uint64_t seed, ExperimentPlan const& plan) -> TaskOutput
{
    TaskOutput out;
    cfg.seed = seed;
    auto const fp = fingerprint(cfg);
    try {
        auto const time_limit = plan.time_limit;
        Engine engine{cfg};
        engine.set_trace(plan.trace);
        auto const start = std::chrono::steady_clock::now();
        auto const stop = [&] {
            return time_limit > 0.0 &&
                   std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count() > time_limit;
        };
        auto const observer = [&](RunState const& state, GenerationRecord& rec) {
            ResultRow row;
            row.fingerprint = fp;
            row.seed = seed;
            row.generation = rec.generation;
            row.igd = rec.igd;
            row.time = rec.time;
            out.rows.push_back(std::move(row));
            bool const hv_due = cfg.metrics.hv && cfg.metrics.due(rec.generation, cfg.generations);
            out.fronts.push_back(hv_due ? nondominated_rows(state.objectives) : Matrix{});
        };
        auto const history = engine.run_until(stop, observer);
        if (!plan.snapshot_dir.empty()) {
            auto const path = std::filesystem::path(plan.snapshot_dir) / fmt::format("{}_{}.snap", fp, seed);
            write_snapshot(path.string(), history.population, history.objectives);
        }
        if (history.records.size() < cfg.generations) {
            out.timed_out = true;
            for (auto& r : out.rows) {
                r.timed_out = true;
            }
        }
    } catch (std::exception const& e) {
        out.failure = CellFailure{fp, seed, e.what()};
    }
    return out;
}

auto format_optional(std::optional<double> const& v) -> std::string
{
    return v ? fmt::format("{:.17g}", *v) : std::string{};
}

auto split_csv(std::string const& line) -> std::vector<std::string>
{
    std::vector<std::string> fields;
    std::string cur;
    for (char const c : line) {
        if (c == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    fields.push_back(std::move(cur));
    return fields;
}

template <typename T>
auto parse_number(std::string const& s, std::size_t line, char const* column) -> T
{
    T value{};
    auto const* first = s.data();
    auto const* last = s.data() + s.size();
    auto const [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last || s.empty()) {
        throw ParseError(line, fmt::format("column {}: cannot parse '{}'", column, s));
    }
    return value;
}

auto parse_optional(std::string const& s, std::size_t line, char const* column) -> std::optional<double>
{
    if (s.empty()) {
        return std::nullopt;
    }
    return parse_number<double>(s, line, column);
}

auto t_quantile(double level, Index count) -> double
{
    boost::math::students_t const dist(static_cast<double>(count - 1));
    return boost::math::quantile(dist, 0.5 + level / 2.0);
}

void write_meta(std::string const& path, ExperimentPlan const& plan, PlanReport const& report)
{
    nlohmann::json meta;
    meta["configs"] = nlohmann::json::object();
    for (auto const& cell : plan.cells) {
        Engine const engine{cell};
        auto resolved = nlohmann::json::parse(to_json_string(engine.config(), false));
        resolved["reference_point_count"] = engine.references().size();
        resolved["mutation_rate"] = engine.config().variation.mutation_rate(engine.problem().variables());
        meta["configs"][fingerprint(cell)] = resolved;
    }
    meta["seeds"] = plan.resolved_seeds();
    meta["time_limit"] = plan.time_limit;
    meta["failures"] = nlohmann::json::array();
    for (auto const& f : report.failures) {
        meta["failures"].push_back({{"fingerprint", f.fingerprint}, {"seed", f.seed}, {"message", f.message}});
    }
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        throw IoError("cannot write '" + path + "'");
    }
    out << meta.dump(2) << '\n';
}

} // namespace

auto worker_count(Index requested) -> Index
{
    Index n = requested != 0 ? requested : std::max<Index>(1, std::thread::hardware_concurrency());
    if (char const* env = std::getenv(kWorkersEnv); env != nullptr && *env != '\0') {
        Index cap = 0;
        auto const* end = env + std::char_traits<char>::length(env);
        auto const [ptr, ec] = std::from_chars(env, end, cap);
        if (ec != std::errc{} || ptr != end || cap == 0) {
            throw ConfigError(kWorkersEnv, "expected a positive integer");
        }
        n = std::min(n, cap);
    }
    return std::max<Index>(n, 1);
}

auto run_plan(ExperimentPlan const& plan) -> PlanReport
{
    plan.validate();
    std::vector<Task> tasks;
    for (Index c = 0; c < plan.cells.size(); ++c) {
        for (auto const s : plan.resolved_seeds()) {
            tasks.push_back({c, s});
        }
    }

    std::vector<TaskOutput> outputs(tasks.size());
    std::atomic<Index> next{0};
    auto const worker = [&] {
        for (Index t = next++; t < tasks.size(); t = next++) {
            outputs[t] = run_task(plan.cells[tasks[t].cell], tasks[t].seed, plan);
        }
    };
    auto const workers = plan.timing || plan.trace != nullptr ? Index{1} : std::min(worker_count(), tasks.size());
    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (Index w = 0; w < workers; ++w) {
            pool.emplace_back(worker);
        }
    }

    // Normalized HV shares one scale per problem instance across every front.
    std::map<std::string, std::vector<std::pair<Index, Index>>> groups;
    for (Index t = 0; t < tasks.size(); ++t) {
        auto const key = problem_key(plan.cells[tasks[t].cell].problem);
        for (Index r = 0; r < outputs[t].fronts.size(); ++r) {
            if (outputs[t].fronts[r].rows() > 0) {
                groups[key].emplace_back(t, r);
            }
        }
    }
    for (auto const& [key, members] : groups) {
        std::vector<Matrix> fronts;
        fronts.reserve(members.size());
        for (auto const& [t, r] : members) {
            fronts.push_back(outputs[t].fronts[r]);
        }
        auto const& metrics = plan.cells[tasks[members.front().first].cell].metrics;
        HypervolumeOptions opts;
        opts.samples = metrics.hv_samples;
        auto const hv = normalized_hv(fronts, opts);
        for (Index i = 0; i < members.size(); ++i) {
            auto& row = outputs[members[i].first].rows[members[i].second];
            row.hv_raw = hv.raw[i];
            row.hv_normalized = hv.normalized[i];
        }
    }

    PlanReport report;
    for (auto& o : outputs) {
        if (o.failure) {
            report.failures.push_back(*o.failure);
        }
        if (o.timed_out) {
            ++report.timed_out_cells;
        }
        for (auto& r : o.rows) {
            report.rows.push_back(std::move(r));
        }
    }
    if (!plan.output.empty()) {
        write_results_csv(plan.output, report.rows);
        write_meta(plan.output + ".meta.json", plan, report);
    }
    return report;
}

void write_results_csv(std::ostream& out, std::vector<ResultRow> const& rows)
{
    out << kHeader << '\n';
    for (auto const& r : rows) {
        out << fmt::format("{},{},{},{},{},{},{:.9g},{:.9g},{:.9g},{:.9g},{}\n", r.fingerprint, r.seed, r.generation,
                           format_optional(r.igd), format_optional(r.hv_raw), format_optional(r.hv_normalized),
                           r.time.variation, r.time.sort, r.time.niche, r.time.evaluation, r.timed_out ? 1 : 0);
    }
}

void write_results_csv(std::string const& path, std::vector<ResultRow> const& rows)
{
    namespace fs = std::filesystem;
    fs::path const target{path};
    auto tmp = target;
    tmp += ".tmp";
    try {
        {
            std::ofstream out(tmp, std::ios::trunc);
            if (!out) {
                throw IoError("cannot open '" + tmp.string() + "' for writing");
            }
            write_results_csv(out, rows);
            out.flush();
            if (!out) {
                throw IoError("write to '" + tmp.string() + "' failed");
            }
        }
        fs::rename(tmp, target);
    } catch (fs::filesystem_error const& e) {
        std::error_code ec;
        fs::remove(tmp, ec);
        throw IoError(e.what());
    } catch (...) {
        std::error_code ec;
        fs::remove(tmp, ec);
        throw;
    }
}

auto read_results_csv(std::istream& in) -> std::vector<ResultRow>
{
    std::vector<ResultRow> rows;
    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(in, line)) {
        throw ParseError(1, "missing header");
    }
    ++line_no;
    if (!line.empty() && line.back() == '\r') {
        line.pop_back();
    }
    if (line != kHeader) {
        throw ParseError(line_no, "unexpected header");
    }
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") {
            continue;
        }
        auto const f = split_csv(line);
        if (f.size() != 11) {
            throw ParseError(line_no, fmt::format("expected 11 fields, found {}", f.size()));
        }
        ResultRow r;
        r.fingerprint = f[0];
        if (r.fingerprint.empty()) {
            throw ParseError(line_no, "empty fingerprint");
        }
        r.seed = parse_number<std::uint64_t>(f[1], line_no, "seed");
        r.generation = parse_number<Index>(f[2], line_no, "generation");
        r.igd = parse_optional(f[3], line_no, "igd");
        r.hv_raw = parse_optional(f[4], line_no, "hv_raw");
        r.hv_normalized = parse_optional(f[5], line_no, "hv_normalized");
        r.time.variation = parse_number<double>(f[6], line_no, "t_variation");
        r.time.sort = parse_number<double>(f[7], line_no, "t_sort");
        r.time.niche = parse_number<double>(f[8], line_no, "t_niche");
        r.time.evaluation = parse_number<double>(f[9], line_no, "t_eval");
        for (double const t : {r.time.variation, r.time.sort, r.time.niche, r.time.evaluation}) {
            if (!(t >= 0.0)) {
                throw ParseError(line_no, "negative timing");
            }
        }
        if (f[10] != "0" && f[10] != "1") {
            throw ParseError(line_no, "timed_out must be 0 or 1");
        }
        r.timed_out = f[10] == "1";
        rows.push_back(std::move(r));
    }
    return rows;
}

auto read_results_csv(std::string const& path) -> std::vector<ResultRow>
{
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open '" + path + "'");
    }
    return read_results_csv(in);
}

auto describe(std::vector<double> const& values, double level) -> Stat
{
    Stat s;
    s.count = values.size();
    if (values.empty()) {
        auto const nan = std::numeric_limits<double>::quiet_NaN();
        s.mean = s.sd = s.ci_low = s.ci_high = nan;
        return s;
    }
    double sum = 0.0;
    for (auto const v : values) {
        sum += v;
    }
    s.mean = sum / static_cast<double>(s.count);
    if (s.count == 1) {
        s.ci_low = s.ci_high = s.mean;
        return s;
    }
    double ss = 0.0;
    for (auto const v : values) {
        ss += (v - s.mean) * (v - s.mean);
    }
    s.sd = std::sqrt(ss / static_cast<double>(s.count - 1));
    auto const half = t_quantile(level, s.count) * s.sd / std::sqrt(static_cast<double>(s.count));
    s.ci_low = s.mean - half;
    s.ci_high = s.mean + half;
    return s;
}

auto summarize(std::vector<ResultRow> const& rows) -> std::vector<SummaryRow>
{
    struct Run {
        ResultRow const* last = nullptr;
        double time_sum = 0.0;
        Index time_count = 0;
        double first_time = 0.0;
        Index generations = 0;
    };
    std::vector<std::string> order;
    std::map<std::string, std::map<std::uint64_t, Run>> runs;
    for (auto const& r : rows) {
        if (runs.find(r.fingerprint) == runs.end()) {
            order.push_back(r.fingerprint);
        }
        auto& run = runs[r.fingerprint][r.seed];
        if (run.last == nullptr || r.generation > run.last->generation) {
            run.last = &r;
        }
        ++run.generations;
        if (r.generation <= 1) {
            run.first_time = r.time.total();
        } else {
            run.time_sum += r.time.total();
            ++run.time_count;
        }
    }

    std::vector<SummaryRow> out;
    for (auto const& fp : order) {
        SummaryRow s;
        s.fingerprint = fp;
        std::vector<double> igd;
        std::vector<double> hv_raw;
        std::vector<double> hv_norm;
        std::vector<double> gen_time;
        for (auto const& [seed, run] : runs[fp]) {
            ++s.runs;
            if (run.last->igd) {
                igd.push_back(*run.last->igd);
            }
            if (run.last->hv_raw) {
                hv_raw.push_back(*run.last->hv_raw);
            }
            if (run.last->hv_normalized) {
                hv_norm.push_back(*run.last->hv_normalized);
            }
            gen_time.push_back(run.time_count > 0 ? run.time_sum / static_cast<double>(run.time_count)
                                                  : run.first_time);
        }
        s.igd = describe(igd);
        s.hv_raw = describe(hv_raw);
        s.hv_normalized = describe(hv_norm);
        s.generation_time = describe(gen_time);
        out.push_back(std::move(s));
    }
    return out;
}

void write_summary_csv(std::ostream& out, std::vector<SummaryRow> const& summary)
{
    out << "fingerprint,runs";
    for (auto const* name : {"igd", "hv_raw", "hv_normalized", "t_generation"}) {
        out << fmt::format(",{0}_n,{0}_mean,{0}_sd,{0}_ci_low,{0}_ci_high", name);
    }
    out << '\n';
    for (auto const& s : summary) {
        out << s.fingerprint << ',' << s.runs;
        for (auto const* st : {&s.igd, &s.hv_raw, &s.hv_normalized, &s.generation_time}) {
            out << fmt::format(",{},{:.17g},{:.17g},{:.17g},{:.17g}", st->count, st->mean, st->sd, st->ci_low,
                               st->ci_high);
        }
        out << '\n';
    }
}

auto steady_state_times(std::vector<GenerationRecord> const& records) -> PhaseTimes
{
    PhaseTimes sum;
    if (records.empty()) {
        return sum;
    }
    auto const skip = records.size() > 1 ? Index{1} : Index{0};
    for (Index i = skip; i < records.size(); ++i) {
        sum += records[i].time;
    }
    auto const n = static_cast<double>(records.size() - skip);
    sum.variation /= n;
    sum.sort /= n;
    sum.niche /= n;
    sum.evaluation /= n;
    return sum;
}

auto compare_backends(RunConfig base, std::vector<Index> const& sizes, Index reps) -> std::vector<SpeedupRow>
{
    if (sizes.empty()) {
        throw ConfigError("sizes", "at least one population size is required");
    }
    if (reps < 1) {
        throw ConfigError("reps", "must be at least 1");
    }
    base.metrics.igd = false;
    base.metrics.hv = false;
    auto const first_seed = base.seed;
    std::vector<SpeedupRow> out;
    for (auto const n : sizes) {
        SpeedupRow row;
        row.population = n;
        for (auto const backend : {Backend::Batched, Backend::Oracle}) {
            PhaseTimes acc;
            for (Index r = 0; r < reps; ++r) {
                auto cfg = base;
                cfg.population = n;
                cfg.backend = backend;
                cfg.seed = first_seed + r;
                acc += steady_state_times(Engine{cfg}.run().records);
            }
            auto const scale = 1.0 / static_cast<double>(reps);
            PhaseTimes mean{acc.variation * scale, acc.sort * scale, acc.niche * scale, acc.evaluation * scale};
            (backend == Backend::Batched ? row.batched : row.oracle) = mean;
        }
        row.niche_speedup = row.batched.niche > 0.0 ? row.oracle.niche / row.batched.niche : 0.0;
        row.total_speedup = row.batched.total() > 0.0 ? row.oracle.total() / row.batched.total() : 0.0;
        out.push_back(row);
    }
    return out;
}

void write_speedup_csv(std::ostream& out, std::vector<SpeedupRow> const& rows)
{
    out << "population,batched_niche,oracle_niche,niche_speedup,batched_generation,oracle_generation,total_speedup\n";
    for (auto const& r : rows) {
        out << fmt::format("{},{:.9g},{:.9g},{:.6g},{:.9g},{:.9g},{:.6g}\n", r.population, r.batched.niche,
                           r.oracle.niche, r.niche_speedup, r.batched.total(), r.oracle.total(), r.total_speedup);
    }
}

} // namespace tnsga
