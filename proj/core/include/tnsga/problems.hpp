#ifndef TNSGA_PROBLEMS_HPP
#define TNSGA_PROBLEMS_HPP

#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "tnsga/batchcore.hpp"

namespace tnsga {

enum class DtlzKind { Dtlz2, Dtlz3, Dtlz5, Dtlz7 };

[[nodiscard]] auto to_string(DtlzKind kind) -> std::string_view;
[[nodiscard]] auto parse_dtlz_kind(std::string_view name) -> DtlzKind;

// Box-constrained DTLZ problem on [0, 1]^d with m objectives.
struct ContinuousProblem {
    DtlzKind kind = DtlzKind::Dtlz2;
    int objectives = 3;
    int variables = 12;

    void validate() const;
};

// Evaluates every row; throws DomainError for entries outside [0, 1].
[[nodiscard]] auto dtlz_eval(ContinuousProblem const& problem, Matrix const& x) -> Matrix;

// `count` points on the true front. DTLZ2/3 use a low-discrepancy sequence
// mapped onto the positive orthant of the unit sphere, DTLZ5 spaces points
// evenly along its curve, and DTLZ7 samples the product of the disconnected
// optimal intervals.
[[nodiscard]] auto dtlz_pf_sample(DtlzKind kind, int objectives, Index count) -> Matrix;

// NK landscapes sharing one bit string, one per objective.
struct MnkInstance {
    int objectives = 2;
    int bits = 16;
    int epistasis = 2;
    std::uint64_t seed = 0;
    // contributions[o][i * 2^(K+1) + code]
    std::vector<std::vector<double>> contributions;
    // neighbors[o][i * K + t]
    std::vector<std::vector<int>> neighbors;

    [[nodiscard]] auto table_width() const noexcept -> Index { return Index{1} << static_cast<unsigned>(epistasis + 1); }
};

// Objective o = -(1/N) sum_i table_o[i][code_i], where code_i packs bit i
// (most significant) followed by its K neighbours.
[[nodiscard]] auto mnk_eval(MnkInstance const& inst, Matrix const& bits) -> Matrix;

// Maximize m profit sums under one weight capacity.
struct KnapsackInstance {
    int objectives = 2;
    int items = 10;
    std::uint64_t seed = 0;
    std::vector<std::vector<double>> profits; // [objective][item]
    std::vector<double> weights;
    double capacity = 0.0;
};

// Ratio-greedy repair followed by negated profit sums. Repaired rows are
// written back into `bits`.
[[nodiscard]] auto knapsack_eval(KnapsackInstance const& inst, Matrix& bits) -> Matrix;

// Items removed, in order, when repairing one selection.
[[nodiscard]] auto knapsack_repair(KnapsackInstance const& inst, std::vector<std::uint8_t>& selection)
    -> std::vector<int>;

[[nodiscard]] auto generate_mnk(int objectives, int bits, int epistasis, std::uint64_t seed) -> MnkInstance;
[[nodiscard]] auto generate_knapsack(int objectives, int items, std::uint64_t seed) -> KnapsackInstance;

// Uniform handle over the benchmark suite.
class Problem {
public:
    using Variant = std::variant<ContinuousProblem, MnkInstance, KnapsackInstance>;

    Problem() = default;
    explicit Problem(Variant v) : impl_(std::move(v)) {}

    [[nodiscard]] auto objectives() const -> Index;
    [[nodiscard]] auto variables() const -> Index;
    [[nodiscard]] auto binary() const noexcept -> bool { return !std::holds_alternative<ContinuousProblem>(impl_); }
    [[nodiscard]] auto has_reference_front() const noexcept -> bool { return !binary(); }
    [[nodiscard]] auto name() const -> std::string;

    // May rewrite rows of x (knapsack repair).
    [[nodiscard]] auto evaluate(Matrix& x) const -> Matrix;
    [[nodiscard]] auto reference_front(Index count) const -> Matrix;

    [[nodiscard]] auto variant() const noexcept -> Variant const& { return impl_; }

private:
    Variant impl_;
};

// Instances as JSON, for cross-implementation checks.
[[nodiscard]] auto to_json_string(MnkInstance const& inst) -> std::string;
[[nodiscard]] auto to_json_string(KnapsackInstance const& inst) -> std::string;

} // namespace tnsga

#endif
