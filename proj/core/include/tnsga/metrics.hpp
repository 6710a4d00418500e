#ifndef TNSGA_METRICS_HPP
#define TNSGA_METRICS_HPP

#include <cstdint>
#include <vector>

#include "tnsga/batchcore.hpp"

namespace tnsga {

// Mean distance from each reference point to its nearest front member.
// Throws ParameterError for empty inputs or mismatched widths.
[[nodiscard]] auto igd(Matrix const& front, Matrix const& reference) -> double;

struct HypervolumeOptions {
    Index samples = 1'000'000;     // Monte Carlo draws for m > 3
    std::uint64_t seed = 0x5eed;
};

struct HypervolumeResult {
    double value = 0.0;
    double std_error = 0.0; // zero for exact results
    bool exact = true;
};

// Volume dominated by `front` and bounded by `ref`. Points that do not
// strictly dominate `ref` are discarded first. Exact for m <= 3, seeded Monte
// Carlo above.
[[nodiscard]] auto hypervolume(Matrix const& front, Eigen::RowVectorXd const& ref,
                               HypervolumeOptions const& options = {}) -> HypervolumeResult;

// Forces the Monte Carlo estimator regardless of m.
[[nodiscard]] auto hypervolume_monte_carlo(Matrix const& front, Eigen::RowVectorXd const& ref,
                                           HypervolumeOptions const& options = {}) -> HypervolumeResult;

// Scaling shared by a collection of fronts:
//   ref_j   = 1.01 * max_j
//   ideal_j = 0.9  * min_j
//   hv_max  = prod_j (ref_j - ideal_j)
// with extrema taken over every front in the collection.
struct HvScale {
    Eigen::RowVectorXd ref;
    Eigen::RowVectorXd ideal;
    double hv_max = 0.0;
};

[[nodiscard]] auto hv_scale(std::vector<Matrix> const& fronts) -> HvScale;

struct NormalizedHv {
    std::vector<double> raw;
    std::vector<double> normalized;
    HvScale scale;
    bool degenerate = false; // hv_max == 0; every normalized value is 0
};

[[nodiscard]] auto normalized_hv(std::vector<Matrix> const& fronts, HypervolumeOptions const& options = {})
    -> NormalizedHv;

// Rows of `objectives` not dominated by any other row.
[[nodiscard]] auto nondominated_rows(Matrix const& objectives) -> Matrix;

} // namespace tnsga

#endif
