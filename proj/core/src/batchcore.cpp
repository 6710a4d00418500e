#include "tnsga/batchcore.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

#include "tnsga/errors.hpp"

namespace tnsga {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

constexpr auto mix64(std::uint64_t z) noexcept -> std::uint64_t
{
    z = (z ^ (z >> 30U)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27U)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31U);
}

constexpr auto key_of(std::uint64_t seed, std::uint64_t stream) noexcept -> std::uint64_t
{
    return mix64(seed ^ mix64(stream + 0x632BE59BD9B4E019ULL));
}

} // namespace

auto CounterRng::at(std::uint64_t index) const noexcept -> std::uint64_t
{
    auto const key = key_of(seed_, stream_);
    return mix64(mix64(key + (index + 1) * kGolden) ^ key);
}

auto CounterRng::uniform() noexcept -> double
{
    return static_cast<double>(next() >> 11U) * 0x1.0p-53;
}

__extension__ using u128 = unsigned __int128;

auto CounterRng::below(std::uint64_t bound) noexcept -> std::uint64_t
{
    // Lemire's multiply-shift with rejection, exact for every bound.
    auto x = next();
    auto m = static_cast<u128>(x) * bound;
    auto low = static_cast<std::uint64_t>(m);
    if (low < bound) {
        auto const threshold = (0 - bound) % bound;
        while (low < threshold) {
            x = next();
            m = static_cast<u128>(x) * bound;
            low = static_cast<std::uint64_t>(m);
        }
    }
    return static_cast<std::uint64_t>(m >> 64U);
}

auto CounterRng::fork(std::uint64_t id) const noexcept -> CounterRng
{
    return CounterRng{seed_, mix64(stream_ ^ mix64(id * kGolden + 0x2545F4914F6CDD1DULL))};
}

MaskedMatrix::MaskedMatrix(Matrix data)
    : data_(std::move(data)), valid_(static_cast<Index>(data_.rows()), 1)
{
}

MaskedMatrix::MaskedMatrix(Matrix data, Mask valid)
    : data_(std::move(data)), valid_(std::move(valid))
{
    if (valid_.size() != static_cast<Index>(data_.rows())) {
        throw ShapeError("mask length " + std::to_string(valid_.size()) + " != rows " + std::to_string(data_.rows()));
    }
    for (Index i = 0; i < valid_.size(); ++i) {
        if (valid_[i] == 0) {
            data_.row(static_cast<Eigen::Index>(i)).setConstant(kSentinel);
        }
    }
}

auto MaskedMatrix::valid_count() const noexcept -> Index
{
    return static_cast<Index>(std::count_if(valid_.begin(), valid_.end(), [](auto v) { return v != 0; }));
}

void MaskedMatrix::set_row(Index i, Eigen::Ref<Eigen::RowVectorXd const> values)
{
    if (values.size() != data_.cols()) {
        throw ShapeError("row width mismatch");
    }
    data_.row(static_cast<Eigen::Index>(i)) = values;
    valid_.at(i) = 1;
}

void MaskedMatrix::invalidate(Index i)
{
    valid_.at(i) = 0;
    data_.row(static_cast<Eigen::Index>(i)).setConstant(kSentinel);
}

auto MaskedMatrix::compact() const -> Matrix
{
    Matrix out(static_cast<Eigen::Index>(valid_count()), data_.cols());
    Eigen::Index r = 0;
    for (Index i = 0; i < valid_.size(); ++i) {
        if (valid_[i] != 0) {
            out.row(r++) = data_.row(static_cast<Eigen::Index>(i));
        }
    }
    return out;
}

auto step_mask(std::span<double const> x) -> Mask
{
    Mask out(x.size());
    std::transform(x.begin(), x.end(), out.begin(), [](double v) { return static_cast<std::uint8_t>(v > 0.0); });
    return out;
}

auto masked_argmin(std::span<double const> values, std::span<std::uint8_t const> valid) -> Index
{
    if (values.size() != valid.size()) {
        throw ShapeError("masked_argmin: values and mask differ in length");
    }
    Index best = kNoIndex;
    for (Index i = 0; i < values.size(); ++i) {
        if (valid[i] != 0 && (best == kNoIndex || values[i] < values[best])) {
            best = i;
        }
    }
    if (best == kNoIndex) {
        throw EmptySelectionError("masked_argmin: no valid slot");
    }
    return best;
}

auto segment_count(std::span<Index const> labels, std::span<std::uint8_t const> valid, Index segments)
    -> std::vector<Index>
{
    if (labels.size() != valid.size()) {
        throw ShapeError("segment_count: labels and mask differ in length");
    }
    std::vector<Index> counts(segments, 0);
    for (Index i = 0; i < labels.size(); ++i) {
        if (valid[i] == 0) {
            continue;
        }
        if (labels[i] >= segments) {
            throw std::out_of_range("segment_count: label " + std::to_string(labels[i]) + " out of range");
        }
        ++counts[labels[i]];
    }
    return counts;
}

auto random_permutation(Index n, CounterRng& rng) -> std::vector<Index>
{
    std::vector<Index> perm(n);
    for (Index i = 0; i < n; ++i) {
        perm[i] = i;
    }
    for (Index i = n; i > 1; --i) {
        auto const j = static_cast<Index>(rng.below(i));
        std::swap(perm[i - 1], perm[j]);
    }
    return perm;
}

auto permute_rows(Matrix const& m, std::span<Index const> perm) -> Matrix
{
    Matrix out(static_cast<Eigen::Index>(perm.size()), m.cols());
    for (Index i = 0; i < perm.size(); ++i) {
        out.row(static_cast<Eigen::Index>(i)) = m.row(static_cast<Eigen::Index>(perm[i]));
    }
    return out;
}

auto shuffle_rows(MaskedMatrix const& m, CounterRng& rng) -> ShuffledRows
{
    auto perm = random_permutation(m.rows(), rng);
    Mask valid(perm.size());
    for (Index i = 0; i < perm.size(); ++i) {
        valid[i] = m.valid()[perm[i]];
    }
    return {MaskedMatrix{permute_rows(m.data(), perm), std::move(valid)}, std::move(perm)};
}

} // namespace tnsga
