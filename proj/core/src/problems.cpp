#include "tnsga/problems.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>
#include <utility>

#include <boost/math/special_functions/erf.hpp>
#include <json.hpp>

#include "tnsga/errors.hpp"

namespace tnsga {

namespace {

constexpr double kPi = std::numbers::pi;

void check_unit_box(Matrix const& x)
{
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        auto const v = x.data()[i];
        if (!(v >= 0.0 && v <= 1.0)) {
            throw DomainError("DTLZ decision variable outside [0, 1]: " + std::to_string(v));
        }
    }
}

void check_bits(Matrix const& x, int width, char const* who)
{
    if (x.cols() != width) {
        throw ShapeError(std::string(who) + ": expected " + std::to_string(width) + " bits per row, got " +
                         std::to_string(x.cols()));
    }
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        auto const v = x.data()[i];
        if (v != 0.0 && v != 1.0) {
            throw DomainError(std::string(who) + ": non-binary entry " + std::to_string(v));
        }
    }
}

// Spherical objectives from angles theta_0..theta_{m-2} and radius.
void spherical(double radius, std::span<double const> theta, std::span<double> f)
{
    auto const m = f.size();
    for (Index j = 0; j < m; ++j) {
        double v = radius;
        for (Index i = 0; i + 1 + j < m; ++i) {
            v *= std::cos(theta[i]);
        }
        if (j > 0) {
            v *= std::sin(theta[m - 1 - j]);
        }
        f[j] = v;
    }
}

// Components of the generalized golden-ratio (R_d) sequence.
auto kronecker_alphas(Index dims) -> std::vector<double>
{
    double phi = 2.0;
    for (int it = 0; it < 64; ++it) {
        phi = std::pow(1.0 + phi, 1.0 / static_cast<double>(dims + 1));
    }
    std::vector<double> alpha(dims);
    for (Index k = 0; k < dims; ++k) {
        alpha[k] = std::fmod(std::pow(1.0 / phi, static_cast<double>(k + 1)), 1.0);
    }
    return alpha;
}

auto kronecker(std::vector<double> const& alpha, Index i, Index k) -> double
{
    return std::fmod(0.5 + static_cast<double>(i + 1) * alpha[k], 1.0);
}

auto dtlz7_phi(double x) -> double
{
    return x * (1.0 + std::sin(3.0 * kPi * x));
}

// Pareto-optimal intervals of one DTLZ7 position variable: the points where
// x (1 + sin 3 pi x) sets a new running maximum.
auto dtlz7_intervals() -> std::vector<std::pair<double, double>> const&
{
    static auto const intervals = [] {
        constexpr int steps = 1'000'000;
        std::vector<std::pair<double, double>> out;
        double best = -1.0;
        bool open = false;
        double start = 0.0;
        double prev = 0.0;
        for (int s = 0; s <= steps; ++s) {
            auto const x = static_cast<double>(s) / steps;
            auto const v = dtlz7_phi(x);
            auto const record = v > best;
            if (record) {
                best = v;
                if (!open) {
                    start = x;
                    open = true;
                }
            } else if (open) {
                out.emplace_back(start, prev);
                open = false;
            }
            prev = x;
        }
        if (open) {
            out.emplace_back(start, prev);
        }
        return out;
    }();
    return intervals;
}

auto map_to_intervals(double u) -> double
{
    auto const& iv = dtlz7_intervals();
    double total = 0.0;
    for (auto const& [a, b] : iv) {
        total += b - a;
    }
    double pos = u * total;
    for (auto const& [a, b] : iv) {
        if (pos <= b - a) {
            return a + pos;
        }
        pos -= b - a;
    }
    return iv.back().second;
}

} // namespace

auto to_string(DtlzKind kind) -> std::string_view
{
    switch (kind) {
    case DtlzKind::Dtlz2: return "dtlz2";
    case DtlzKind::Dtlz3: return "dtlz3";
    case DtlzKind::Dtlz5: return "dtlz5";
    case DtlzKind::Dtlz7: return "dtlz7";
    }
    return "unknown";
}

auto parse_dtlz_kind(std::string_view name) -> DtlzKind
{
    for (auto k : {DtlzKind::Dtlz2, DtlzKind::Dtlz3, DtlzKind::Dtlz5, DtlzKind::Dtlz7}) {
        if (to_string(k) == name) {
            return k;
        }
    }
    throw ConfigError("problem.kind", "unsupported problem '" + std::string(name) + "'");
}

void ContinuousProblem::validate() const
{
    if (objectives < 2) {
        throw ConfigError("problem.objectives", "must be >= 2");
    }
    if (variables < objectives) {
        throw ConfigError("problem.variables", "must be >= objectives");
    }
}

auto dtlz_eval(ContinuousProblem const& problem, Matrix const& x) -> Matrix
{
    problem.validate();
    if (x.cols() != problem.variables) {
        throw ShapeError("dtlz_eval: expected " + std::to_string(problem.variables) + " variables");
    }
    check_unit_box(x);
    auto const m = static_cast<Index>(problem.objectives);
    auto const d = static_cast<Index>(problem.variables);
    auto const k = d - m + 1;

    Matrix f(x.rows(), static_cast<Eigen::Index>(m));
    std::vector<double> theta(m - 1);
    std::vector<double> row(m);
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
        auto const xr = x.row(r);
        auto tail = [&](auto&& term) {
            double s = 0.0;
            for (Index i = m - 1; i < d; ++i) {
                s += term(xr[static_cast<Eigen::Index>(i)]);
            }
            return s;
        };
        switch (problem.kind) {
        case DtlzKind::Dtlz2:
        case DtlzKind::Dtlz3: {
            double g = 0.0;
            if (problem.kind == DtlzKind::Dtlz2) {
                g = tail([](double v) { return (v - 0.5) * (v - 0.5); });
            } else {
                g = 100.0 * (static_cast<double>(k) +
                             tail([](double v) { return (v - 0.5) * (v - 0.5) - std::cos(20.0 * kPi * (v - 0.5)); }));
            }
            for (Index i = 0; i + 1 < m; ++i) {
                theta[i] = xr[static_cast<Eigen::Index>(i)] * kPi / 2.0;
            }
            spherical(1.0 + g, theta, row);
            break;
        }
        case DtlzKind::Dtlz5: {
            auto const g = tail([](double v) { return (v - 0.5) * (v - 0.5); });
            theta[0] = xr[0] * kPi / 2.0;
            for (Index i = 1; i + 1 < m; ++i) {
                theta[i] = kPi / (4.0 * (1.0 + g)) * (1.0 + 2.0 * g * xr[static_cast<Eigen::Index>(i)]);
            }
            spherical(1.0 + g, theta, row);
            break;
        }
        case DtlzKind::Dtlz7: {
            auto const g = 1.0 + 9.0 / static_cast<double>(k) * tail([](double v) { return v; });
            double h = static_cast<double>(m);
            for (Index j = 0; j + 1 < m; ++j) {
                row[j] = xr[static_cast<Eigen::Index>(j)];
                h -= row[j] / (1.0 + g) * (1.0 + std::sin(3.0 * kPi * row[j]));
            }
            row[m - 1] = (1.0 + g) * h;
            break;
        }
        }
        for (Index j = 0; j < m; ++j) {
            f(r, static_cast<Eigen::Index>(j)) = row[j];
        }
    }
    return f;
}

auto dtlz_pf_sample(DtlzKind kind, int objectives, Index count) -> Matrix
{
    if (objectives < 2 || count == 0) {
        throw ParameterError("dtlz_pf_sample: need >= 2 objectives and a positive count");
    }
    auto const m = static_cast<Index>(objectives);
    Matrix out(static_cast<Eigen::Index>(count), objectives);
    std::vector<double> row(m);
    std::vector<double> theta(m - 1);

    switch (kind) {
    case DtlzKind::Dtlz2:
    case DtlzKind::Dtlz3: {
        // |N(0,1)| per coordinate, normalized: uniform on the orthant of the sphere.
        auto const alpha = kronecker_alphas(m);
        for (Index i = 0; i < count; ++i) {
            double norm2 = 0.0;
            for (Index k = 0; k < m; ++k) {
                auto const t = kronecker(alpha, i, k);
                row[k] = std::sqrt(2.0) * boost::math::erf_inv(t);
                norm2 += row[k] * row[k];
            }
            auto const norm = std::sqrt(norm2);
            for (Index k = 0; k < m; ++k) {
                out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) =
                    norm > 0.0 ? row[k] / norm : 1.0 / std::sqrt(static_cast<double>(m));
            }
        }
        break;
    }
    case DtlzKind::Dtlz5: {
        for (Index i = 0; i < count; ++i) {
            auto const t = (static_cast<double>(i) + 0.5) / static_cast<double>(count);
            theta[0] = t * kPi / 2.0;
            for (Index k = 1; k + 1 < m; ++k) {
                theta[k] = kPi / 4.0;
            }
            spherical(1.0, theta, row);
            for (Index k = 0; k < m; ++k) {
                out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = row[k];
            }
        }
        break;
    }
    case DtlzKind::Dtlz7: {
        auto const alpha = kronecker_alphas(m - 1);
        for (Index i = 0; i < count; ++i) {
            double sum = 0.0;
            for (Index k = 0; k + 1 < m; ++k) {
                auto const x = map_to_intervals(kronecker(alpha, i, k));
                out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = x;
                sum += dtlz7_phi(x);
            }
            out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(m - 1)) = 2.0 * static_cast<double>(m) - sum;
        }
        break;
    }
    }
    return out;
}

auto mnk_eval(MnkInstance const& inst, Matrix const& bits) -> Matrix
{
    check_bits(bits, inst.bits, "mnk_eval");
    auto const n = static_cast<Index>(inst.bits);
    auto const k = static_cast<Index>(inst.epistasis);
    auto const width = inst.table_width();
    Matrix f(bits.rows(), inst.objectives);
    for (Eigen::Index r = 0; r < bits.rows(); ++r) {
        for (int o = 0; o < inst.objectives; ++o) {
            auto const& table = inst.contributions[static_cast<Index>(o)];
            auto const& nb = inst.neighbors[static_cast<Index>(o)];
            double sum = 0.0;
            for (Index i = 0; i < n; ++i) {
                Index code = bits(r, static_cast<Eigen::Index>(i)) != 0.0 ? 1 : 0;
                for (Index t = 0; t < k; ++t) {
                    code = (code << 1U) | (bits(r, nb[i * k + t]) != 0.0 ? 1U : 0U);
                }
                sum += table[i * width + code];
            }
            f(r, o) = -sum / static_cast<double>(n);
        }
    }
    return f;
}

auto knapsack_repair(KnapsackInstance const& inst, std::vector<std::uint8_t>& selection) -> std::vector<int>
{
    double weight = 0.0;
    for (int i = 0; i < inst.items; ++i) {
        if (selection[static_cast<Index>(i)] != 0) {
            weight += inst.weights[static_cast<Index>(i)];
        }
    }
    std::vector<int> removed;
    while (weight > inst.capacity) {
        int worst = -1;
        double worst_ratio = 0.0;
        for (int i = 0; i < inst.items; ++i) {
            if (selection[static_cast<Index>(i)] == 0) {
                continue;
            }
            double best_profit = 0.0;
            for (auto const& p : inst.profits) {
                best_profit = std::max(best_profit, p[static_cast<Index>(i)]);
            }
            auto const ratio = best_profit / inst.weights[static_cast<Index>(i)];
            if (worst < 0 || ratio < worst_ratio) {
                worst = i;
                worst_ratio = ratio;
            }
        }
        selection[static_cast<Index>(worst)] = 0;
        weight -= inst.weights[static_cast<Index>(worst)];
        removed.push_back(worst);
    }
    return removed;
}

auto knapsack_eval(KnapsackInstance const& inst, Matrix& bits) -> Matrix
{
    check_bits(bits, inst.items, "knapsack_eval");
    Matrix f(bits.rows(), inst.objectives);
    std::vector<std::uint8_t> selection(static_cast<Index>(inst.items));
    for (Eigen::Index r = 0; r < bits.rows(); ++r) {
        for (int i = 0; i < inst.items; ++i) {
            selection[static_cast<Index>(i)] = bits(r, i) != 0.0 ? 1 : 0;
        }
        if (!knapsack_repair(inst, selection).empty()) {
            for (int i = 0; i < inst.items; ++i) {
                bits(r, i) = selection[static_cast<Index>(i)];
            }
        }
        for (int o = 0; o < inst.objectives; ++o) {
            double sum = 0.0;
            for (int i = 0; i < inst.items; ++i) {
                if (selection[static_cast<Index>(i)] != 0) {
                    sum += inst.profits[static_cast<Index>(o)][static_cast<Index>(i)];
                }
            }
            f(r, o) = -sum;
        }
    }
    return f;
}

auto generate_mnk(int objectives, int bits, int epistasis, std::uint64_t seed) -> MnkInstance
{
    if (objectives < 1) {
        throw ConfigError("problem.objectives", "must be >= 1");
    }
    if (bits < 1) {
        throw ConfigError("problem.bits", "must be >= 1");
    }
    if (epistasis < 0 || epistasis > bits - 1) {
        throw ConfigError("problem.epistasis", "must lie in [0, bits - 1]");
    }
    if (epistasis > 20) {
        throw ConfigError("problem.epistasis", "tables above K = 20 are not supported");
    }
    MnkInstance inst{objectives, bits, epistasis, seed, {}, {}};
    auto const n = static_cast<Index>(bits);
    auto const k = static_cast<Index>(epistasis);
    CounterRng rng{seed, 0x4d4e4bULL};
    std::vector<int> pool;
    for (int o = 0; o < objectives; ++o) {
        auto& table = inst.contributions.emplace_back(n * inst.table_width());
        for (auto& v : table) {
            v = rng.uniform();
        }
        auto& nb = inst.neighbors.emplace_back();
        nb.reserve(n * k);
        for (Index i = 0; i < n; ++i) {
            pool.clear();
            for (int j = 0; j < bits; ++j) {
                if (static_cast<Index>(j) != i) {
                    pool.push_back(j);
                }
            }
            for (Index t = 0; t < k; ++t) {
                auto const pick = t + static_cast<Index>(rng.below(pool.size() - t));
                std::swap(pool[t], pool[pick]);
                nb.push_back(pool[t]);
            }
        }
    }
    return inst;
}

auto generate_knapsack(int objectives, int items, std::uint64_t seed) -> KnapsackInstance
{
    if (objectives < 1) {
        throw ConfigError("problem.objectives", "must be >= 1");
    }
    if (items < 1) {
        throw ConfigError("problem.items", "must be >= 1");
    }
    KnapsackInstance inst{objectives, items, seed, {}, {}, 0.0};
    CounterRng rng{seed, 0x4b4e4150ULL};
    auto draw = [&] { return static_cast<double>(10 + rng.below(91)); };
    for (int o = 0; o < objectives; ++o) {
        auto& p = inst.profits.emplace_back(static_cast<Index>(items));
        for (auto& v : p) {
            v = draw();
        }
    }
    inst.weights.resize(static_cast<Index>(items));
    for (auto& v : inst.weights) {
        v = draw();
    }
    inst.capacity = std::floor(std::accumulate(inst.weights.begin(), inst.weights.end(), 0.0) / 2.0);
    return inst;
}

auto Problem::objectives() const -> Index
{
    return std::visit(
        [](auto const& p) -> Index {
            return static_cast<Index>(p.objectives);
        },
        impl_);
}

auto Problem::variables() const -> Index
{
    return std::visit(
        [](auto const& p) -> Index {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, ContinuousProblem>) {
                return static_cast<Index>(p.variables);
            } else if constexpr (std::is_same_v<T, MnkInstance>) {
                return static_cast<Index>(p.bits);
            } else {
                return static_cast<Index>(p.items);
            }
        },
        impl_);
}

auto Problem::name() const -> std::string
{
    return std::visit(
        [](auto const& p) -> std::string {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, ContinuousProblem>) {
                return std::string(to_string(p.kind));
            } else if constexpr (std::is_same_v<T, MnkInstance>) {
                return "mnk";
            } else {
                return "knapsack";
            }
        },
        impl_);
}

auto Problem::evaluate(Matrix& x) const -> Matrix
{
    return std::visit(
        [&x](auto const& p) -> Matrix {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, ContinuousProblem>) {
                return dtlz_eval(p, x);
            } else if constexpr (std::is_same_v<T, MnkInstance>) {
                return mnk_eval(p, x);
            } else {
                return knapsack_eval(p, x);
            }
        },
        impl_);
}

auto Problem::reference_front(Index count) const -> Matrix
{
    auto const* p = std::get_if<ContinuousProblem>(&impl_);
    if (p == nullptr) {
        throw ParameterError("no closed-form front for " + name());
    }
    return dtlz_pf_sample(p->kind, p->objectives, count);
}

auto to_json_string(MnkInstance const& inst) -> std::string
{
    nlohmann::json j{{"type", "mnk"},
                     {"objectives", inst.objectives},
                     {"bits", inst.bits},
                     {"epistasis", inst.epistasis},
                     {"seed", inst.seed},
                     {"contributions", inst.contributions},
                     {"neighbors", inst.neighbors}};
    return j.dump();
}

auto to_json_string(KnapsackInstance const& inst) -> std::string
{
    nlohmann::json j{{"type", "knapsack"},
                     {"objectives", inst.objectives},
                     {"items", inst.items},
                     {"seed", inst.seed},
                     {"profits", inst.profits},
                     {"weights", inst.weights},
                     {"capacity", inst.capacity}};
    return j.dump();
}

} // namespace tnsga
