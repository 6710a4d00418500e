#include "tnsga/dominance.hpp"

#include <algorithm>
#include <array>
#include <cstdint>
#include <limits>
#include <string>

#include "tnsga/errors.hpp"

#if defined(__SSE2__)
#include <emmintrin.h>
#endif

namespace tnsga {

namespace {

// In-place transpose of a 64 x 64 bit matrix: bit c of a[r] moves to bit r of a[c].
void transpose64(std::array<std::uint64_t, 64>& a)
{
    std::uint64_t mask = 0x00000000FFFFFFFFULL;
    for (unsigned j = 32; j != 0; j >>= 1, mask ^= (mask << j)) {
        for (unsigned k = 0; k < 64; k = ((k | j) + 1) & ~j) {
            auto const t = ((a[k] >> j) ^ a[k | j]) & mask;
            a[k] ^= t << j;
            a[k | j] ^= t;
        }
    }
}

} // namespace

auto RankVector::front_sizes() const -> std::vector<Index>
{
    std::vector<Index> sizes;
    for (auto r : ranks) {
        if (r == kDroppedRank || r < 0) {
            continue;
        }
        if (static_cast<Index>(r) >= sizes.size()) {
            sizes.resize(static_cast<Index>(r) + 1, 0);
        }
        ++sizes[static_cast<Index>(r)];
    }
    return sizes;
}

auto RankVector::count_below(Rank bound) const noexcept -> Index
{
    return static_cast<Index>(std::count_if(ranks.begin(), ranks.end(), [bound](Rank r) { return r < bound; }));
}

auto dominates(std::span<double const> a, std::span<double const> b) -> bool
{
    if (a.size() != b.size()) {
        throw ShapeError("dominates: objective vectors differ in length");
    }
    bool strictly = false;
    for (Index k = 0; k < a.size(); ++k) {
        if (a[k] > b[k]) {
            return false;
        }
        strictly = strictly || a[k] < b[k];
    }
    return strictly;
}

auto dominance_matrix(MaskedMatrix const& objectives) -> DominanceMatrix
{
    auto const n = objectives.rows();
    auto const m = objectives.cols();
    DominanceMatrix dom(n);
    Matrix const& f = objectives.data();
    auto const& valid = objectives.valid();

    // Objective-major copy so the comparisons for one row run over contiguous memory.
    std::vector<double> cols(m * n);
    for (Index j = 0; j < n; ++j) {
        for (Index k = 0; k < m; ++k) {
            cols[k * n + j] = valid[j] != 0 ? f(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) : 0.0;
        }
    }

    // Flags are carried as doubles (0 or 1): same lane width as the compared
    // values, which is what lets the compiler vectorize the selects below.
    // Columns are tiled so the flags stay in L1.
    constexpr Index kTile = 256;
    std::array<double, kTile> no_worse{};
    std::array<double, kTile> better{};
    for (Index i = 0; i < n; ++i) {
        if (valid[i] == 0) {
            continue;
        }
        double const* fi = f.data() + i * m;
        auto out = dom.row(i);
        for (Index j0 = 0; j0 < n; j0 += kTile) {
            auto const len = std::min(kTile, n - j0);
            std::fill_n(no_worse.begin(), len, 1.0);
            std::fill_n(better.begin(), len, 0.0);
            for (Index k = 0; k < m; ++k) {
                double const x = fi[k];
                double const* __restrict c = cols.data() + k * n + j0;
                double* __restrict nw = no_worse.data();
                double* __restrict bt = better.data();
                for (Index j = 0; j < len; ++j) {
                    nw[j] = x <= c[j] ? nw[j] : 0.0;
                    bt[j] = x < c[j] ? 1.0 : bt[j];
                }
            }
            for (Index j = 0; j < len; ++j) {
                out[j0 + j] = static_cast<std::uint8_t>(no_worse[j] * better[j] != 0.0) & valid[j0 + j];
            }
        }
    }
    return dom;
}

auto dominator_bits(MaskedMatrix const& objectives) -> DominatorBits
{
    auto const n = objectives.rows();
    auto const m = objectives.cols();
    auto const& valid = objectives.valid();
    DominatorBits out(n);
    auto const words = out.words();
    auto const padded = words * 64;

    // Objective-major, padded with +inf; padding and invalid slots are masked out below.
    std::vector<double> cols(m * padded, std::numeric_limits<double>::infinity());
    std::vector<std::uint64_t> valid_bits(words, 0);
    for (Index i = 0; i < n; ++i) {
        if (valid[i] == 0) {
            continue;
        }
        valid_bits[i / 64] |= std::uint64_t{1} << (i % 64);
        for (Index k = 0; k < m; ++k) {
            cols[k * padded + i] = objectives.data()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k));
        }
    }

    // Blocks of 64 x 64 slots. One comparison pass over (row block J, column
    // block I >= J) yields both directions: with no_worse = all(c <= x) and
    // better = any(c < x), "c dominates x" is no_worse & better and
    // "x dominates c" is !no_worse & !better.
    std::array<std::uint64_t, 64> forward{};
    std::array<std::uint64_t, 64> reverse{};
    std::vector<double> x(m);
    for (Index bj = 0; bj < words; ++bj) {
        for (Index bi = bj; bi < words; ++bi) {
            forward.fill(0);
            reverse.fill(0);
            for (Index jj = 0; jj < 64; ++jj) {
                auto const j = bj * 64 + jj;
                if (j >= n || valid[j] == 0) {
                    continue;
                }
                for (Index k = 0; k < m; ++k) {
                    x[k] = cols[k * padded + j];
                }
                std::uint64_t fw = 0;
                std::uint64_t rv = 0;
                auto const base = bi * 64;
#if defined(__SSE2__)
                for (Index b = 0; b < 64; b += 2) {
                    __m128d no_worse = _mm_castsi128_pd(_mm_set1_epi32(-1));
                    __m128d better = _mm_setzero_pd();
                    for (Index k = 0; k < m; ++k) {
                        __m128d const c = _mm_loadu_pd(cols.data() + k * padded + base + b);
                        __m128d const xv = _mm_set1_pd(x[k]);
                        no_worse = _mm_and_pd(no_worse, _mm_cmple_pd(c, xv));
                        better = _mm_or_pd(better, _mm_cmplt_pd(c, xv));
                    }
                    auto const f_bits = _mm_movemask_pd(_mm_and_pd(no_worse, better));
                    auto const r_bits = _mm_movemask_pd(_mm_or_pd(no_worse, better)) ^ 3;
                    fw |= static_cast<std::uint64_t>(f_bits) << b;
                    rv |= static_cast<std::uint64_t>(r_bits) << b;
                }
#else
                for (Index b = 0; b < 64; ++b) {
                    bool no_worse = true;
                    bool better = false;
                    for (Index k = 0; k < m; ++k) {
                        double const c = cols[k * padded + base + b];
                        no_worse = no_worse && c <= x[k];
                        better = better || c < x[k];
                    }
                    fw |= static_cast<std::uint64_t>(no_worse && better) << b;
                    rv |= static_cast<std::uint64_t>(!no_worse && !better) << b;
                }
#endif
                forward[jj] = fw & valid_bits[bi];
                reverse[jj] = rv & valid_bits[bi];
            }
            for (Index jj = 0; jj < 64 && bj * 64 + jj < n; ++jj) {
                out.row(bj * 64 + jj)[bi] = forward[jj];
            }
            if (bi != bj) {
                transpose64(reverse);
                for (Index ii = 0; ii < 64 && bi * 64 + ii < n; ++ii) {
                    out.row(bi * 64 + ii)[bj] = reverse[ii];
                }
            }
        }
    }
    return out;
}

auto non_dominated_sort(MaskedMatrix const& objectives) -> RankVector
{
    auto const n = objectives.rows();
    auto const dom = dominator_bits(objectives);
    auto const& valid = objectives.valid();
    auto const words = dom.words();

    std::vector<std::uint64_t> remaining(words, 0);
    std::vector<Index> pending;
    for (Index i = 0; i < n; ++i) {
        if (valid[i] != 0) {
            remaining[i / 64] |= std::uint64_t{1} << (i % 64);
            pending.push_back(i);
        }
    }

    RankVector result{std::vector<Rank>(n, kDroppedRank)};
    std::vector<Index> front;
    for (Rank level = 0; !pending.empty(); ++level) {
        // A slot joins the front when none of its dominators remain.
        front.clear();
        auto keep = pending.begin();
        for (auto const j : pending) {
            auto const row = dom.row(j);
            bool free = true;
            for (Index w = 0; w < words && free; ++w) {
                free = (row[w] & remaining[w]) == 0;
            }
            if (free) {
                front.push_back(j);
            } else {
                *keep++ = j;
            }
        }
        pending.erase(keep, pending.end());
        for (auto const j : front) {
            result[j] = level;
            remaining[j / 64] &= ~(std::uint64_t{1} << (j % 64));
        }
    }
    return result;
}

auto split_fronts(RankVector& ranks, Index n) -> FrontSplit
{
    auto const sizes = ranks.front_sizes();
    Index cumulative = 0;
    for (Index l = 0; l < sizes.size(); ++l) {
        if (cumulative + sizes[l] >= n) {
            FrontSplit split{static_cast<Rank>(l), cumulative, n - cumulative, sizes[l]};
            for (auto& r : ranks.ranks) {
                if (r != kDroppedRank && r > split.l) {
                    r = kDroppedRank;
                }
            }
            return split;
        }
        cumulative += sizes[l];
    }
    throw InfeasibleError("split_fronts: only " + std::to_string(cumulative) + " ranked individuals for a budget of " +
                          std::to_string(n));
}

} // namespace tnsga
