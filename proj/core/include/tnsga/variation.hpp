#ifndef TNSGA_VARIATION_HPP
#define TNSGA_VARIATION_HPP

#include <utility>
#include <vector>

#include "tnsga/batchcore.hpp"
#include "tnsga/dominance.hpp"

namespace tnsga {

struct VariationConfig {
    double eta_c = 20.0;
    double eta_m = 20.0;
    double p_c = 1.0;
    double p_m = -1.0; // negative selects 1/d
    std::vector<double> lower;
    std::vector<double> upper;
    bool tournament = false;

    // Throws ConfigError naming the offending field.
    void validate(Index dimension) const;

    [[nodiscard]] auto mutation_rate(Index dimension) const noexcept -> double
    {
        return p_m < 0.0 ? 1.0 / static_cast<double>(dimension) : p_m;
    }
};

using ParentPairs = std::vector<std::pair<Index, Index>>;

// Random permutation of 0..n-1 cut into consecutive pairs. n must be even.
[[nodiscard]] auto mating_pool(Index n, CounterRng& rng) -> ParentPairs;

// Binary tournament on rank (lower wins, ties by coin flip); size of ranks must be even.
[[nodiscard]] auto tournament_pool(RankVector const& ranks, CounterRng& rng) -> ParentPairs;

// SBX spread factor beta(u).
[[nodiscard]] auto sbx_spread(double u, double eta) noexcept -> double;

struct ChildPair {
    Eigen::RowVectorXd first;
    Eigen::RowVectorXd second;
};

// Unclamped children for one spread factor per variable; preserves the parents' sum.
[[nodiscard]] auto sbx_blend(Eigen::Ref<Eigen::RowVectorXd const> p1, Eigen::Ref<Eigen::RowVectorXd const> p2,
                             Eigen::Ref<Eigen::RowVectorXd const> beta) -> ChildPair;

[[nodiscard]] auto sbx_pair(Eigen::Ref<Eigen::RowVectorXd const> p1, Eigen::Ref<Eigen::RowVectorXd const> p2,
                            VariationConfig const& cfg, CounterRng& rng) -> ChildPair;

// Mutated value of x for draw u (unclamped); u = 0.5 leaves x unchanged.
[[nodiscard]] auto polynomial_step(double x, double u, double lower, double upper, double eta) noexcept -> double;

[[nodiscard]] auto polynomial_mutation(Matrix x, VariationConfig const& cfg, CounterRng& rng) -> Matrix;

// Rows (2i, 2i+1) are crossed uniformly with probability p_c, then each bit
// flips with probability p_m.
[[nodiscard]] auto binary_variation(Matrix const& x, double p_c, double p_m, CounterRng& rng) -> Matrix;

// Full offspring batch of the same size as `parents`.
[[nodiscard]] auto make_offspring(Matrix const& parents, RankVector const& ranks, VariationConfig const& cfg,
                                  bool binary, CounterRng& rng) -> Matrix;

} // namespace tnsga

#endif
