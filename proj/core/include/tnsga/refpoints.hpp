#ifndef TNSGA_REFPOINTS_HPP
#define TNSGA_REFPOINTS_HPP

#include <cstdint>
#include <iosfwd>

#include "tnsga/batchcore.hpp"

namespace tnsga {

// Simplex-lattice parameters. inner == 0 means a single layer.
struct LatticeParams {
    int outer = 1;
    int inner = 0;

    friend auto operator==(LatticeParams const&, LatticeParams const&) -> bool = default;
};

// Reference directions on the unit simplex, one per row.
struct ReferencePointSet {
    Matrix points;
    LatticeParams divisions;

    [[nodiscard]] auto size() const noexcept -> Index { return static_cast<Index>(points.rows()); }
    [[nodiscard]] auto objectives() const noexcept -> Index { return static_cast<Index>(points.cols()); }
};

// C(n, k) saturating at UINT64_MAX.
[[nodiscard]] auto binomial(std::uint64_t n, std::uint64_t k) noexcept -> std::uint64_t;

// Number of points of the single-layer lattice, C(H + m - 1, m - 1).
[[nodiscard]] auto lattice_size(int objectives, int divisions) noexcept -> std::uint64_t;

// All points (i_1/H, ..., i_m/H) with nonnegative integers summing to H,
// ordered lexicographically by (i_1, ..., i_m).
[[nodiscard]] auto das_dennis(int objectives, int divisions) -> ReferencePointSet;

// Outer lattice plus an inner lattice shrunk halfway toward the centroid.
[[nodiscard]] auto two_layer(int objectives, int outer, int inner) -> ReferencePointSet;

[[nodiscard]] auto make_reference_points(int objectives, LatticeParams params) -> ReferencePointSet;

// Largest lattice with at most `target` points: single layer for m <= 5,
// two layers above that.
[[nodiscard]] auto choose_divisions(int objectives, Index target) -> LatticeParams;

void write_csv(std::ostream& out, ReferencePointSet const& refs);

} // namespace tnsga

#endif
