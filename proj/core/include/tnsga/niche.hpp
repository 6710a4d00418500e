#ifndef TNSGA_NICHE_HPP
#define TNSGA_NICHE_HPP

#include <iosfwd>
#include <limits>
#include <vector>

#include "tnsga/batchcore.hpp"
#include "tnsga/dominance.hpp"

namespace tnsga {

// How the distance from an objective vector f to the direction z is measured.
enum class DistanceForm {
    Perpendicular, // |f| * sqrt(1 - cos^2): distance to the line through z
    RootCosine,    // |f| * sqrt(1 - cos): the unsquared variant
};

// Niche count of a reference point that can no longer receive individuals.
inline constexpr Index kDisabledCount = std::numeric_limits<Index>::max();

struct Normalization {
    Eigen::RowVectorXd ideal;
    Eigen::RowVectorXd intercepts;
    bool fallback = false; // at least one intercept came from a fallback rule
};

// Translates by the running ideal point (updated in place; an empty ideal
// starts fresh) and scales by hyperplane intercepts through the ASF extreme
// points. Degenerate intercepts fall back to the per-objective maximum of the
// translated values, then to 1.
[[nodiscard]] auto normalize_objectives(MaskedMatrix const& objectives, Eigen::RowVectorXd& ideal,
                                        Normalization* info = nullptr) -> MaskedMatrix;

// D(i, j): distance from row i of `normalized` to reference direction j.
// Rows with zero norm yield zero rows. Throws ParameterError for a zero reference.
[[nodiscard]] auto perpendicular_distance_matrix(Matrix const& normalized, Matrix const& refs,
                                                 DistanceForm form = DistanceForm::Perpendicular) -> Matrix;

struct AssociationInfo {
    std::vector<Index> pi; // nearest reference point, kNoIndex for invalid rows
    std::vector<double> d; // distance to it, kSentinel for invalid rows
};

// Row-wise argmin of D over valid rows, lowest column on ties.
[[nodiscard]] auto associate(Matrix const& distances, Mask const& valid) -> AssociationInfo;

// Same association as associate(perpendicular_distance_matrix(...)) without
// materializing D: one dot-product pass per row against unit directions.
[[nodiscard]] auto associate_direct(MaskedMatrix const& normalized, Matrix const& refs,
                                    DistanceForm form = DistanceForm::Perpendicular) -> AssociationInfo;

struct NicheCounts {
    std::vector<Index> rho;       // selected members per point; kDisabledCount when disabled
    std::vector<Index> rho_prime; // remaining candidates per point
};

// rho over {rank < l}, rho_prime over {rank == l}; points with no candidates are disabled.
[[nodiscard]] auto niche_counts(AssociationInfo const& info, RankVector const& ranks, Rank l, Index refs)
    -> NicheCounts;

struct NicheOptions {
    DistanceForm form = DistanceForm::Perpendicular;
    bool verify_counts = false;   // recount from scratch after every phase; throws std::logic_error on drift
    std::ostream* trace = nullptr; // one JSON record per phase / loop iteration
};

// Mutable state of one batched niche selection over a shuffled merged population.
struct NicheState {
    AssociationInfo info;
    NicheCounts counts;
    RankVector ranks;
    Mask promoted;      // slots moved from the splitting front into the survivor set
    Rank l = 0;
    Index target = 0;   // survivors wanted (n)
    Index selected = 0; // members with rank < l
    NicheOptions const* options = nullptr;

    [[nodiscard]] auto remaining() const noexcept -> Index { return target - selected; }
};

[[nodiscard]] auto make_niche_state(AssociationInfo info, RankVector ranks, FrontSplit const& split, Index target,
                                    Index refs, NicheOptions const* options = nullptr) -> NicheState;

// Every empty niche with candidates takes its nearest candidate at once. When
// that would exceed the budget, the lowest-index points (the shuffled
// reference order) win. Returns the number of individuals taken.
auto nearest_selection(NicheState& state) -> Index;

// Per-point candidate lists of the splitting front in population order,
// padded with kNoIndex to the longest list.
struct CacheTable {
    Index width = 0;
    std::vector<Index> entries; // refs x width, row-major
    std::vector<Index> cursor;  // next unread column per point

    [[nodiscard]] auto at(Index point, Index column) const -> Index { return entries[point * width + column]; }
    [[nodiscard]] auto row(Index point) const -> std::span<Index const> { return {entries.data() + point * width, width}; }
};

// Candidates already promoted stay in their row; cursors start past them.
[[nodiscard]] auto build_cache(NicheState const& state) -> CacheTable;

// Advances the cursor of `point` past promoted entries.
void skip_consumed(NicheState const& state, CacheTable& cache, Index point);

struct LoopStats {
    Index iterations = 0;
    Index taken = 0;
};

// Fills the remaining budget in rounds: every point at the minimum finite
// niche count takes the candidate at its cursor. The last round keeps only as
// many points as needed, lowest index first. Throws InfeasibleError if all
// points are disabled before the budget is met.
auto batched_random_selection(NicheState& state, CacheTable& cache) -> LoopStats;

struct NicheResult {
    RankVector ranks; // exactly `target` entries below l
    Index nearest_taken = 0;
    Index loop_iterations = 0;
};

// Full batched niche selection. `normalized` rows must follow the same
// (shuffled) order as `ranks`; rows beyond the splitting front may be invalid.
// `refs` is expected in shuffled order as well.
[[nodiscard]] auto batched_niche_select(MaskedMatrix const& normalized, Matrix const& refs, RankVector ranks,
                                        FrontSplit const& split, Index target, NicheOptions const& options = {})
    -> NicheResult;

// One-at-a-time reference implementation: repeatedly picks a uniformly random
// minimum-count point, then its nearest candidate (empty niche) or a uniformly
// random one. Returns every selected slot (fronts < l plus chosen), ascending.
[[nodiscard]] auto oracle_niche_select(MaskedMatrix const& normalized, Matrix const& refs, RankVector const& ranks,
                                       FrontSplit const& split, Index target, CounterRng& rng,
                                       DistanceForm form = DistanceForm::Perpendicular) -> std::vector<Index>;

// Point-to-line distance by explicit projection; the scalar route used by the oracle.
[[nodiscard]] auto projection_distance(Eigen::Ref<Eigen::RowVectorXd const> f, Eigen::Ref<Eigen::RowVectorXd const> z,
                                       DistanceForm form = DistanceForm::Perpendicular) -> double;

} // namespace tnsga

#endif
