#include "tnsga/refpoints.hpp"

#include <algorithm>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "tnsga/errors.hpp"

namespace tnsga {

namespace {

void check_params(int objectives, int divisions)
{
    if (objectives < 2) {
        throw ParameterError("reference points need at least 2 objectives, got " + std::to_string(objectives));
    }
    if (divisions < 1) {
        throw ParameterError("lattice divisions must be >= 1, got " + std::to_string(divisions));
    }
}

// Integer compositions of `total` into `parts` nonnegative parts.
template <typename Visit>
void for_each_composition(int parts, int total, Visit&& visit)
{
    std::vector<int> c(static_cast<std::size_t>(parts), 0);
    auto recurse = [&](auto&& self, int pos, int left) -> void {
        if (pos == parts - 1) {
            c[static_cast<std::size_t>(pos)] = left;
            visit(c);
            return;
        }
        for (int i = 0; i <= left; ++i) {
            c[static_cast<std::size_t>(pos)] = i;
            self(self, pos + 1, left - i);
        }
    };
    recurse(recurse, 0, total);
}

auto lattice_integers(int objectives, int divisions) -> std::vector<std::vector<int>>
{
    std::vector<std::vector<int>> out;
    out.reserve(static_cast<std::size_t>(lattice_size(objectives, divisions)));
    for_each_composition(objectives, divisions, [&](std::vector<int> const& c) { out.push_back(c); });
    return out;
}

} // namespace

__extension__ using u128 = unsigned __int128;

auto binomial(std::uint64_t n, std::uint64_t k) noexcept -> std::uint64_t
{
    if (k > n) {
        return 0;
    }
    k = std::min(k, n - k);
    u128 r = 1;
    for (std::uint64_t i = 1; i <= k; ++i) {
        r = r * (n - k + i) / i;
        if (r > std::numeric_limits<std::uint64_t>::max()) {
            return std::numeric_limits<std::uint64_t>::max();
        }
    }
    return static_cast<std::uint64_t>(r);
}

auto lattice_size(int objectives, int divisions) noexcept -> std::uint64_t
{
    if (objectives < 1 || divisions < 0) {
        return 0;
    }
    return binomial(static_cast<std::uint64_t>(divisions + objectives - 1), static_cast<std::uint64_t>(objectives - 1));
}

auto das_dennis(int objectives, int divisions) -> ReferencePointSet
{
    check_params(objectives, divisions);
    auto const ints = lattice_integers(objectives, divisions);
    ReferencePointSet set{Matrix(static_cast<Eigen::Index>(ints.size()), objectives), {divisions, 0}};
    for (std::size_t r = 0; r < ints.size(); ++r) {
        for (int c = 0; c < objectives; ++c) {
            set.points(static_cast<Eigen::Index>(r), c) = static_cast<double>(ints[r][static_cast<std::size_t>(c)]) / divisions;
        }
    }
    return set;
}

auto two_layer(int objectives, int outer, int inner) -> ReferencePointSet
{
    check_params(objectives, outer);
    if (inner < 0) {
        throw ParameterError("inner lattice divisions must be >= 0");
    }
    auto set = das_dennis(objectives, outer);
    set.divisions = {outer, inner};
    if (inner == 0) {
        return set;
    }

    // Inner coordinate i/inner maps to (m*i + inner) / (2*m*inner); it hits the
    // outer lattice exactly when that equals some j/outer for every coordinate.
    auto const m = static_cast<std::int64_t>(objectives);
    auto const denom = 2 * m * inner;
    std::vector<std::vector<int>> kept;
    for (auto const& c : lattice_integers(objectives, inner)) {
        bool on_outer = true;
        for (int v : c) {
            if (((m * v + inner) * outer) % denom != 0) {
                on_outer = false;
                break;
            }
        }
        if (!on_outer) {
            kept.push_back(c);
        }
    }

    auto const base = set.points.rows();
    set.points.conservativeResize(base + static_cast<Eigen::Index>(kept.size()), objectives);
    for (std::size_t r = 0; r < kept.size(); ++r) {
        for (int c = 0; c < objectives; ++c) {
            auto const p = static_cast<double>(kept[r][static_cast<std::size_t>(c)]) / inner;
            set.points(base + static_cast<Eigen::Index>(r), c) = 0.5 * p + 0.5 / objectives;
        }
    }
    return set;
}

auto make_reference_points(int objectives, LatticeParams params) -> ReferencePointSet
{
    if (params.inner == 0) {
        return das_dennis(objectives, params.outer);
    }
    return two_layer(objectives, params.outer, params.inner);
}

auto choose_divisions(int objectives, Index target) -> LatticeParams
{
    if (objectives < 2) {
        throw ParameterError("choose_divisions: need at least 2 objectives");
    }
    if (target < static_cast<Index>(objectives)) {
        throw ParameterError("choose_divisions: target population smaller than objective count");
    }

    if (objectives <= 5) {
        int h = 1;
        while (lattice_size(objectives, h + 1) <= target) {
            ++h;
        }
        return {h, 0};
    }

    LatticeParams best{1, 0};
    Index best_count = static_cast<Index>(objectives);
    for (int outer = 1; lattice_size(objectives, outer) <= target; ++outer) {
        for (int inner = 0; inner <= outer; ++inner) {
            if (inner > 0 && lattice_size(objectives, inner) > target) {
                break;
            }
            auto const upper = lattice_size(objectives, outer) + (inner > 0 ? lattice_size(objectives, inner) : 0);
            if (upper <= best_count) {
                continue; // duplicates only shrink the set
            }
            auto const count = two_layer(objectives, outer, inner).size();
            if (count <= target && count > best_count) {
                best = {outer, inner};
                best_count = count;
            }
        }
    }
    return best;
}

void write_csv(std::ostream& out, ReferencePointSet const& refs)
{
    for (Eigen::Index r = 0; r < refs.points.rows(); ++r) {
        for (Eigen::Index c = 0; c < refs.points.cols(); ++c) {
            out << (c == 0 ? "" : ",") << fmt::format("{:.17g}", refs.points(r, c));
        }
        out << '\n';
    }
}

} // namespace tnsga
