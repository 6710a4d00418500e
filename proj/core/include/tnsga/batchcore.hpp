#ifndef TNSGA_BATCHCORE_HPP
#define TNSGA_BATCHCORE_HPP

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace tnsga {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using Mask = std::vector<std::uint8_t>;
using Index = std::size_t;

inline constexpr Index kNoIndex = std::numeric_limits<Index>::max();

// Fill value for invalid slots. Validity is always read from the mask, never
// from comparing against this value.
inline constexpr double kSentinel = std::numeric_limits<double>::quiet_NaN();

// Counter-based generator: the draw at (seed, stream, index) is a pure
// function of its arguments. `next()` walks the index forward; `fork()`
// derives an independent stream so per-slot draws do not depend on the
// order in which slots are processed.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0) noexcept
        : seed_(seed), stream_(stream) {}

    [[nodiscard]] auto at(std::uint64_t index) const noexcept -> std::uint64_t;

    auto next() noexcept -> std::uint64_t { return at(counter_++); }

    // uniform double in [0, 1) with 53 random bits
    auto uniform() noexcept -> double;

    // uniform integer in [0, bound); bound must be positive
    auto below(std::uint64_t bound) noexcept -> std::uint64_t;

    [[nodiscard]] auto fork(std::uint64_t id) const noexcept -> CounterRng;

    [[nodiscard]] auto seed() const noexcept { return seed_; }
    [[nodiscard]] auto stream() const noexcept { return stream_; }
    [[nodiscard]] auto counter() const noexcept { return counter_; }
    void set_counter(std::uint64_t c) noexcept { counter_ = c; }

    // UniformRandomBitGenerator
    using result_type = std::uint64_t;
    static constexpr auto min() noexcept -> result_type { return 0; }
    static constexpr auto max() noexcept -> result_type { return std::numeric_limits<result_type>::max(); }
    auto operator()() noexcept -> result_type { return next(); }

    friend auto operator==(CounterRng const&, CounterRng const&) -> bool = default;

private:
    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t counter_ = 0;
};

// Fixed-shape matrix whose rows are slots; invalid slots hold kSentinel.
class MaskedMatrix {
public:
    MaskedMatrix() = default;
    explicit MaskedMatrix(Matrix data);
    MaskedMatrix(Matrix data, Mask valid);

    [[nodiscard]] auto rows() const noexcept -> Index { return static_cast<Index>(data_.rows()); }
    [[nodiscard]] auto cols() const noexcept -> Index { return static_cast<Index>(data_.cols()); }
    [[nodiscard]] auto data() const noexcept -> Matrix const& { return data_; }
    [[nodiscard]] auto valid() const noexcept -> Mask const& { return valid_; }
    [[nodiscard]] auto is_valid(Index i) const -> bool { return valid_[i] != 0; }
    [[nodiscard]] auto valid_count() const noexcept -> Index;

    [[nodiscard]] auto row(Index i) const { return data_.row(static_cast<Eigen::Index>(i)); }

    // Writes a slot and marks it valid; the shape never changes.
    void set_row(Index i, Eigen::Ref<Eigen::RowVectorXd const> values);
    void invalidate(Index i);

    // Valid rows only, in slot order.
    [[nodiscard]] auto compact() const -> Matrix;

private:
    Matrix data_;
    Mask valid_;
};

// Heaviside step: 1 where x > 0, else 0.
[[nodiscard]] auto step_mask(std::span<double const> x) -> Mask;

// Index of the minimum over valid slots, lowest index on ties.
// Throws EmptySelectionError when no slot is valid.
[[nodiscard]] auto masked_argmin(std::span<double const> values, std::span<std::uint8_t const> valid) -> Index;

// Histogram of labels over valid slots. Throws std::out_of_range for a valid
// label >= segments.
[[nodiscard]] auto segment_count(std::span<Index const> labels, std::span<std::uint8_t const> valid, Index segments)
    -> std::vector<Index>;

// Fisher-Yates permutation of 0..n-1.
[[nodiscard]] auto random_permutation(Index n, CounterRng& rng) -> std::vector<Index>;

// out.row(i) = m.row(perm[i])
[[nodiscard]] auto permute_rows(Matrix const& m, std::span<Index const> perm) -> Matrix;

struct ShuffledRows {
    MaskedMatrix matrix;
    std::vector<Index> permutation; // new index -> old index
};

[[nodiscard]] auto shuffle_rows(MaskedMatrix const& m, CounterRng& rng) -> ShuffledRows;

} // namespace tnsga

#endif
