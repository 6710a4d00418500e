#ifndef TNSGA_DOMINANCE_HPP
#define TNSGA_DOMINANCE_HPP

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "tnsga/batchcore.hpp"

namespace tnsga {

using Rank = int;

// Rank of slots that are invalid or lie beyond the splitting front.
inline constexpr Rank kDroppedRank = std::numeric_limits<Rank>::max();

// 0-based front index per slot.
struct RankVector {
    std::vector<Rank> ranks;

    [[nodiscard]] auto size() const noexcept -> Index { return ranks.size(); }
    [[nodiscard]] auto operator[](Index i) const -> Rank { return ranks[i]; }
    [[nodiscard]] auto operator[](Index i) -> Rank& { return ranks[i]; }

    // Count of slots per front index, dropped slots excluded.
    [[nodiscard]] auto front_sizes() const -> std::vector<Index>;

    // Slots whose rank is strictly below `bound`.
    [[nodiscard]] auto count_below(Rank bound) const noexcept -> Index;

    friend auto operator==(RankVector const&, RankVector const&) -> bool = default;
};

struct FrontSplit {
    Rank l = 0;               // splitting front
    Index selected_count = 0; // members of fronts < l
    Index k = 0;              // slots to fill from front l
    Index front_size = 0;     // members of front l

    // The whole splitting front fits, so no niching is required.
    [[nodiscard]] auto fills_exactly() const noexcept -> bool { return k == front_size; }
};

// Row-major n x n boolean matrix; entry (i, j) is true when row i dominates row j.
class DominanceMatrix {
public:
    DominanceMatrix() = default;
    explicit DominanceMatrix(Index n) : n_(n), bits_(n * n, 0) {}

    [[nodiscard]] auto size() const noexcept -> Index { return n_; }
    [[nodiscard]] auto operator()(Index i, Index j) const -> bool { return bits_[i * n_ + j] != 0; }
    [[nodiscard]] auto row(Index i) const -> std::span<std::uint8_t const> { return {bits_.data() + i * n_, n_}; }
    auto row(Index i) -> std::span<std::uint8_t> { return {bits_.data() + i * n_, n_}; }

private:
    Index n_ = 0;
    std::vector<std::uint8_t> bits_;
};

// Transposed, bit-packed dominance: bit i of row j is set when slot i
// dominates slot j. This is the form the sort peels.
class DominatorBits {
public:
    DominatorBits() = default;
    explicit DominatorBits(Index n) : n_(n), words_((n + 63) / 64), bits_(n * ((n + 63) / 64), 0) {}

    [[nodiscard]] auto size() const noexcept -> Index { return n_; }
    [[nodiscard]] auto words() const noexcept -> Index { return words_; }
    [[nodiscard]] auto row(Index j) const -> std::span<std::uint64_t const> { return {bits_.data() + j * words_, words_}; }
    auto row(Index j) -> std::span<std::uint64_t> { return {bits_.data() + j * words_, words_}; }
    [[nodiscard]] auto dominates(Index i, Index j) const -> bool { return ((row(j)[i / 64] >> (i % 64)) & 1U) != 0; }

private:
    Index n_ = 0;
    Index words_ = 0;
    std::vector<std::uint64_t> bits_;
};

// Minimization Pareto dominance. Throws ShapeError on length mismatch.
[[nodiscard]] auto dominates(std::span<double const> a, std::span<double const> b) -> bool;

// Invalid rows neither dominate nor are dominated.
[[nodiscard]] auto dominance_matrix(MaskedMatrix const& objectives) -> DominanceMatrix;

// Same relation as dominance_matrix, transposed and packed.
[[nodiscard]] auto dominator_bits(MaskedMatrix const& objectives) -> DominatorBits;

// Iterative front peeling over the dominance matrix. Invalid rows get kDroppedRank.
[[nodiscard]] auto non_dominated_sort(MaskedMatrix const& objectives) -> RankVector;

// Locates the splitting front for a survivor budget of n and marks every
// front beyond it as dropped. Throws InfeasibleError when fewer than n slots
// are ranked.
[[nodiscard]] auto split_fronts(RankVector& ranks, Index n) -> FrontSplit;

} // namespace tnsga

#endif
