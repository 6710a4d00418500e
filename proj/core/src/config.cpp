#include "tnsga/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "tnsga/errors.hpp"

namespace tnsga {

namespace {

using Json = nlohmann::json;

auto join(std::string const& path, std::string const& key) -> std::string
{
    return path.empty() ? key : path + "." + key;
}

void reject_unknown(Json const& obj, std::string const& path, std::set<std::string> const& allowed)
{
    if (!obj.is_object()) {
        throw ConfigError(path.empty() ? "<root>" : path, "expected an object");
    }
    for (auto const& [key, _] : obj.items()) {
        if (allowed.count(key) == 0) {
            throw ConfigError(join(path, key), "unknown key");
        }
    }
}

template <typename T>
void read(Json const& obj, std::string const& path, char const* key, T& out)
{
    auto const it = obj.find(key);
    if (it == obj.end()) {
        return;
    }
    auto const field = join(path, key);
    try {
        if constexpr (std::is_same_v<T, bool>) {
            if (!it->is_boolean()) {
                throw ConfigError(field, "expected a boolean");
            }
        } else if constexpr (std::is_integral_v<T>) {
            if (!it->is_number_integer()) {
                throw ConfigError(field, "expected an integer");
            }
            if (std::is_unsigned_v<T> && it->is_number_integer() && !it->is_number_unsigned() &&
                it->template get<std::int64_t>() < 0) {
                throw ConfigError(field, "must be non-negative");
            }
        } else if constexpr (std::is_floating_point_v<T>) {
            if (!it->is_number()) {
                throw ConfigError(field, "expected a number");
            }
        } else if constexpr (std::is_same_v<T, std::string>) {
            if (!it->is_string()) {
                throw ConfigError(field, "expected a string");
            }
        }
        out = it->template get<T>();
    } catch (Json::exception const& e) {
        throw ConfigError(field, e.what());
    }
}

auto parse_problem(Json const& j, std::string const& path) -> ProblemConfig
{
    reject_unknown(j, path, {"kind", "objectives", "variables", "bits", "items", "epistasis", "instance_seed"});
    ProblemConfig p;
    read(j, path, "kind", p.kind);
    read(j, path, "objectives", p.objectives);
    read(j, path, "variables", p.variables);
    read(j, path, "bits", p.variables);
    read(j, path, "items", p.variables);
    read(j, path, "epistasis", p.epistasis);
    read(j, path, "instance_seed", p.instance_seed);
    return p;
}

auto parse_variation(Json const& j, std::string const& path) -> VariationConfig
{
    reject_unknown(j, path, {"eta_c", "eta_m", "p_c", "p_m", "tournament", "lower", "upper"});
    VariationConfig v;
    read(j, path, "eta_c", v.eta_c);
    read(j, path, "eta_m", v.eta_m);
    read(j, path, "p_c", v.p_c);
    if (auto it = j.find("p_m"); it != j.end() && !it->is_null()) {
        read(j, path, "p_m", v.p_m);
    }
    read(j, path, "tournament", v.tournament);
    for (auto const* key : {"lower", "upper"}) {
        auto const it = j.find(key);
        if (it == j.end()) {
            continue;
        }
        if (!it->is_array()) {
            throw ConfigError(join(path, key), "expected an array of numbers");
        }
        auto& dst = std::string_view(key) == "lower" ? v.lower : v.upper;
        for (auto const& x : *it) {
            if (!x.is_number()) {
                throw ConfigError(join(path, key), "expected an array of numbers");
            }
            dst.push_back(x.get<double>());
        }
    }
    return v;
}

auto parse_metrics(Json const& j, std::string const& path) -> MetricSchedule
{
    reject_unknown(j, path, {"every", "igd", "igd_points", "hv", "hv_samples"});
    MetricSchedule s;
    read(j, path, "every", s.every);
    read(j, path, "igd", s.igd);
    read(j, path, "igd_points", s.igd_points);
    read(j, path, "hv", s.hv);
    read(j, path, "hv_samples", s.hv_samples);
    return s;
}

auto parse_distance(std::string const& name) -> DistanceForm
{
    if (name == "perpendicular") {
        return DistanceForm::Perpendicular;
    }
    if (name == "root_cosine") {
        return DistanceForm::RootCosine;
    }
    throw ConfigError("distance", "expected 'perpendicular' or 'root_cosine'");
}

auto run_from_json(Json const& j) -> RunConfig
{
    reject_unknown(j, "", {"problem", "population", "generations", "seed", "backend", "variation", "reference_points",
                           "distance", "metrics", "verify_counts"});
    RunConfig cfg;
    if (auto it = j.find("problem"); it != j.end()) {
        cfg.problem = parse_problem(*it, "problem");
    }
    read(j, "", "population", cfg.population);
    read(j, "", "generations", cfg.generations);
    read(j, "", "seed", cfg.seed);
    std::string name;
    read(j, "", "backend", name);
    if (!name.empty()) {
        cfg.backend = parse_backend(name);
    }
    if (auto it = j.find("variation"); it != j.end()) {
        cfg.variation = parse_variation(*it, "variation");
    }
    if (auto it = j.find("reference_points"); it != j.end()) {
        if (it->is_string() && it->get<std::string>() == "auto") {
            cfg.divisions.reset();
        } else {
            reject_unknown(*it, "reference_points", {"outer", "inner"});
            LatticeParams p;
            read(*it, "reference_points", "outer", p.outer);
            read(*it, "reference_points", "inner", p.inner);
            cfg.divisions = p;
        }
    }
    name.clear();
    read(j, "", "distance", name);
    if (!name.empty()) {
        cfg.distance = parse_distance(name);
    }
    if (auto it = j.find("metrics"); it != j.end()) {
        cfg.metrics = parse_metrics(*it, "metrics");
    }
    read(j, "", "verify_counts", cfg.verify_counts);
    return cfg;
}

auto to_json(RunConfig const& cfg, bool include_seed) -> Json
{
    Json j;
    j["problem"] = {{"kind", cfg.problem.kind},
                    {"objectives", cfg.problem.objectives},
                    {"variables", cfg.problem.variables},
                    {"epistasis", cfg.problem.epistasis},
                    {"instance_seed", cfg.problem.instance_seed}};
    j["population"] = cfg.population;
    j["generations"] = cfg.generations;
    if (include_seed) {
        j["seed"] = cfg.seed;
    }
    j["backend"] = std::string(to_string(cfg.backend));
    Json v = {{"eta_c", cfg.variation.eta_c},
              {"eta_m", cfg.variation.eta_m},
              {"p_c", cfg.variation.p_c},
              {"tournament", cfg.variation.tournament}};
    v["p_m"] = cfg.variation.p_m < 0.0 ? Json(nullptr) : Json(cfg.variation.p_m);
    if (!cfg.variation.lower.empty()) {
        v["lower"] = cfg.variation.lower;
    }
    if (!cfg.variation.upper.empty()) {
        v["upper"] = cfg.variation.upper;
    }
    j["variation"] = v;
    if (cfg.divisions) {
        j["reference_points"] = {{"outer", cfg.divisions->outer}, {"inner", cfg.divisions->inner}};
    } else {
        j["reference_points"] = "auto";
    }
    j["distance"] = cfg.distance == DistanceForm::Perpendicular ? "perpendicular" : "root_cosine";
    j["metrics"] = {{"every", cfg.metrics.every},
                    {"igd", cfg.metrics.igd},
                    {"igd_points", cfg.metrics.igd_points},
                    {"hv", cfg.metrics.hv},
                    {"hv_samples", cfg.metrics.hv_samples}};
    j["verify_counts"] = cfg.verify_counts;
    return j;
}

auto parse_json(std::string_view text) -> Json
{
    try {
        return Json::parse(text);
    } catch (Json::parse_error const& e) {
        // byte offset -> line number
        auto const upto = std::min<std::size_t>(e.byte, text.size());
        auto const line = 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + upto, '\n'));
        throw ParseError(line, e.what());
    }
}

} // namespace

void ExperimentPlan::validate() const
{
    if (cells.empty()) {
        throw ConfigError("grid", "plan has no cells");
    }
    if (repetitions < 1) {
        throw ConfigError("repetitions", "must be at least 1");
    }
    if (time_limit < 0.0) {
        throw ConfigError("time_limit", "must be non-negative");
    }
    for (auto const& c : cells) {
        c.validate();
    }
}

auto ExperimentPlan::resolved_seeds() const -> std::vector<std::uint64_t>
{
    if (!seeds.empty()) {
        return seeds;
    }
    std::vector<std::uint64_t> out;
    auto const base = cells.empty() ? 1 : cells.front().seed;
    for (Index r = 0; r < repetitions; ++r) {
        out.push_back(base + r);
    }
    return out;
}

auto parse_run_config(std::string_view json_text) -> RunConfig
{
    return run_from_json(parse_json(json_text));
}

auto parse_plan(std::string_view json_text) -> ExperimentPlan
{
    auto const doc = parse_json(json_text);
    ExperimentPlan plan;
    if (!doc.is_object() || !doc.contains("base")) {
        plan.cells.push_back(run_from_json(doc));
        return plan;
    }
    reject_unknown(doc, "", {"base", "grid", "seeds", "repetitions", "time_limit", "output", "timing"});
    auto const base = doc.at("base");
    run_from_json(base); // validates keys of the base on its own

    std::vector<Json> cells{base};
    if (auto it = doc.find("grid"); it != doc.end()) {
        if (!it->is_object()) {
            throw ConfigError("grid", "expected an object of lists");
        }
        for (auto const& [key, values] : it->items()) {
            if (!values.is_array() || values.empty()) {
                throw ConfigError("grid." + key, "expected a non-empty list");
            }
            std::vector<Json> next;
            for (auto const& cell : cells) {
                for (auto const& v : values) {
                    auto c = cell;
                    Json patch;
                    patch[key] = v;
                    c.merge_patch(patch);
                    next.push_back(std::move(c));
                }
            }
            cells = std::move(next);
        }
    }
    for (auto const& c : cells) {
        plan.cells.push_back(run_from_json(c));
    }
    if (auto it = doc.find("seeds"); it != doc.end()) {
        if (!it->is_array()) {
            throw ConfigError("seeds", "expected a list of integers");
        }
        for (auto const& s : *it) {
            if (!s.is_number_unsigned()) {
                throw ConfigError("seeds", "expected non-negative integers");
            }
            plan.seeds.push_back(s.get<std::uint64_t>());
        }
    }
    read(doc, "", "repetitions", plan.repetitions);
    read(doc, "", "time_limit", plan.time_limit);
    read(doc, "", "output", plan.output);
    read(doc, "", "timing", plan.timing);
    return plan;
}

auto load_plan(std::string const& path) -> ExperimentPlan
{
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open config '" + path + "'");
    }
    std::ostringstream text;
    text << in.rdbuf();
    return parse_plan(text.str());
}

auto to_json_string(RunConfig const& cfg, bool include_seed) -> std::string
{
    return to_json(cfg, include_seed).dump();
}

auto fingerprint(RunConfig const& cfg) -> std::string
{
    auto const text = to_json_string(cfg, false);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char const c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return fmt::format("{:016x}", h);
}

} // namespace tnsga
