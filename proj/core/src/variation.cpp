#include "tnsga/variation.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tnsga/errors.hpp"

namespace tnsga {

namespace {

constexpr std::uint64_t kCrossoverStream = 1;
constexpr std::uint64_t kMutationStream = 2;
constexpr std::uint64_t kPoolStream = 3;

auto gather_pairs(Matrix const& x, ParentPairs const& pairs) -> Matrix
{
    Matrix out(static_cast<Eigen::Index>(2 * pairs.size()), x.cols());
    for (Index p = 0; p < pairs.size(); ++p) {
        out.row(static_cast<Eigen::Index>(2 * p)) = x.row(static_cast<Eigen::Index>(pairs[p].first));
        out.row(static_cast<Eigen::Index>(2 * p + 1)) = x.row(static_cast<Eigen::Index>(pairs[p].second));
    }
    return out;
}

} // namespace

void VariationConfig::validate(Index dimension) const
{
    if (!(eta_c > 0.0)) {
        throw ConfigError("variation.eta_c", "must be positive");
    }
    if (!(eta_m > 0.0)) {
        throw ConfigError("variation.eta_m", "must be positive");
    }
    if (!(p_c >= 0.0 && p_c <= 1.0)) {
        throw ConfigError("variation.p_c", "must lie in [0, 1]");
    }
    if (p_m > 1.0) {
        throw ConfigError("variation.p_m", "must lie in [0, 1]");
    }
    if (lower.size() != dimension || upper.size() != dimension) {
        throw ConfigError("variation.bounds", "expected " + std::to_string(dimension) + " bounds");
    }
    for (Index i = 0; i < dimension; ++i) {
        if (!(lower[i] < upper[i])) {
            throw ConfigError("variation.bounds", "lower >= upper at variable " + std::to_string(i));
        }
    }
}

auto mating_pool(Index n, CounterRng& rng) -> ParentPairs
{
    if (n % 2 != 0) {
        throw ParameterError("mating_pool: population size must be even, got " + std::to_string(n));
    }
    auto const perm = random_permutation(n, rng);
    ParentPairs pairs(n / 2);
    for (Index p = 0; p < pairs.size(); ++p) {
        pairs[p] = {perm[2 * p], perm[2 * p + 1]};
    }
    return pairs;
}

auto tournament_pool(RankVector const& ranks, CounterRng& rng) -> ParentPairs
{
    auto const n = ranks.size();
    if (n % 2 != 0) {
        throw ParameterError("tournament_pool: population size must be even");
    }
    auto pick = [&] {
        auto const a = static_cast<Index>(rng.below(n));
        auto const b = static_cast<Index>(rng.below(n));
        if (ranks[a] != ranks[b]) {
            return ranks[a] < ranks[b] ? a : b;
        }
        return rng.below(2) == 0 ? a : b;
    };
    ParentPairs pairs(n / 2);
    for (auto& p : pairs) {
        p.first = pick();
        p.second = pick();
    }
    return pairs;
}

auto sbx_spread(double u, double eta) noexcept -> double
{
    auto const e = 1.0 / (eta + 1.0);
    if (u <= 0.5) {
        return std::pow(2.0 * u, e);
    }
    return std::pow(1.0 / (2.0 * (1.0 - u)), e);
}

auto sbx_blend(Eigen::Ref<Eigen::RowVectorXd const> p1, Eigen::Ref<Eigen::RowVectorXd const> p2,
               Eigen::Ref<Eigen::RowVectorXd const> beta) -> ChildPair
{
    auto const ones = Eigen::RowVectorXd::Ones(p1.size());
    ChildPair c;
    c.first = 0.5 * ((ones + beta).cwiseProduct(p1) + (ones - beta).cwiseProduct(p2));
    c.second = 0.5 * ((ones - beta).cwiseProduct(p1) + (ones + beta).cwiseProduct(p2));
    return c;
}

auto sbx_pair(Eigen::Ref<Eigen::RowVectorXd const> p1, Eigen::Ref<Eigen::RowVectorXd const> p2,
              VariationConfig const& cfg, CounterRng& rng) -> ChildPair
{
    auto const d = p1.size();
    Eigen::RowVectorXd beta = Eigen::RowVectorXd::Ones(d);
    for (Eigen::Index i = 0; i < d; ++i) {
        auto const apply = rng.uniform() < cfg.p_c;
        auto const u = rng.uniform();
        if (apply) {
            beta[i] = sbx_spread(u, cfg.eta_c);
        }
    }
    auto children = sbx_blend(p1, p2, beta);
    for (Eigen::Index i = 0; i < d; ++i) {
        auto const lo = cfg.lower[static_cast<Index>(i)];
        auto const hi = cfg.upper[static_cast<Index>(i)];
        children.first[i] = std::clamp(children.first[i], lo, hi);
        children.second[i] = std::clamp(children.second[i], lo, hi);
    }
    return children;
}

auto polynomial_step(double x, double u, double lower, double upper, double eta) noexcept -> double
{
    auto const range = upper - lower;
    auto const e = eta + 1.0;
    double delta = 0.0;
    if (u < 0.5) {
        auto const d1 = (x - lower) / range;
        auto const v = 2.0 * u + (1.0 - 2.0 * u) * std::pow(1.0 - d1, e);
        delta = std::pow(v, 1.0 / e) - 1.0;
    } else {
        auto const d2 = (upper - x) / range;
        auto const v = 2.0 * (1.0 - u) + 2.0 * (u - 0.5) * std::pow(1.0 - d2, e);
        delta = 1.0 - std::pow(v, 1.0 / e);
    }
    return x + delta * range;
}

auto polynomial_mutation(Matrix x, VariationConfig const& cfg, CounterRng& rng) -> Matrix
{
    auto const d = static_cast<Index>(x.cols());
    auto const rate = cfg.mutation_rate(d);
    auto const base = rng.fork(kMutationStream);
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
        auto slot = base.fork(static_cast<std::uint64_t>(r));
        for (Index i = 0; i < d; ++i) {
            auto const apply = slot.uniform() < rate;
            auto const u = slot.uniform();
            if (!apply) {
                continue;
            }
            auto& v = x(r, static_cast<Eigen::Index>(i));
            v = std::clamp(polynomial_step(v, u, cfg.lower[i], cfg.upper[i], cfg.eta_m), cfg.lower[i], cfg.upper[i]);
        }
    }
    return x;
}

auto binary_variation(Matrix const& x, double p_c, double p_m, CounterRng& rng) -> Matrix
{
    Matrix out = x;
    auto const cross = rng.fork(kCrossoverStream);
    for (Eigen::Index p = 0; p + 1 < out.rows(); p += 2) {
        auto slot = cross.fork(static_cast<std::uint64_t>(p / 2));
        if (!(slot.uniform() < p_c)) {
            continue;
        }
        for (Eigen::Index i = 0; i < out.cols(); ++i) {
            if (slot.below(2) == 1) {
                std::swap(out(p, i), out(p + 1, i));
            }
        }
    }
    auto const flip = rng.fork(kMutationStream);
    for (Eigen::Index r = 0; r < out.rows(); ++r) {
        auto slot = flip.fork(static_cast<std::uint64_t>(r));
        for (Eigen::Index i = 0; i < out.cols(); ++i) {
            if (slot.uniform() < p_m) {
                out(r, i) = 1.0 - out(r, i);
            }
        }
    }
    return out;
}

auto make_offspring(Matrix const& parents, RankVector const& ranks, VariationConfig const& cfg, bool binary,
                    CounterRng& rng) -> Matrix
{
    auto const n = static_cast<Index>(parents.rows());
    auto const d = static_cast<Index>(parents.cols());
    auto pool_rng = rng.fork(kPoolStream);
    auto const pairs = cfg.tournament ? tournament_pool(ranks, pool_rng) : mating_pool(n, pool_rng);
    auto const mates = gather_pairs(parents, pairs);

    if (binary) {
        return binary_variation(mates, cfg.p_c, cfg.mutation_rate(d), rng);
    }

    Matrix children(mates.rows(), mates.cols());
    auto const cross = rng.fork(kCrossoverStream);
    for (Eigen::Index p = 0; p + 1 < mates.rows(); p += 2) {
        auto slot = cross.fork(static_cast<std::uint64_t>(p / 2));
        auto c = sbx_pair(mates.row(p), mates.row(p + 1), cfg, slot);
        children.row(p) = c.first;
        children.row(p + 1) = c.second;
    }
    return polynomial_mutation(std::move(children), cfg, rng);
}

} // namespace tnsga
