// Scalar niche selection: one reference point and one individual per step.

#include <algorithm>
#include <limits>
#include <string>

#include "tnsga/errors.hpp"
#include "tnsga/niche.hpp"

namespace tnsga {

auto oracle_niche_select(MaskedMatrix const& normalized, Matrix const& refs, RankVector const& ranks,
                         FrontSplit const& split, Index target, CounterRng& rng, DistanceForm form)
    -> std::vector<Index>
{
    if (normalized.rows() != ranks.size()) {
        throw ShapeError("oracle_niche_select: objective rows and rank vector differ in length");
    }
    auto const w = static_cast<Index>(refs.rows());
    for (Index j = 0; j < w; ++j) {
        if (refs.row(static_cast<Eigen::Index>(j)).squaredNorm() == 0.0) {
            throw ParameterError("reference point " + std::to_string(j) + " has zero norm");
        }
    }

    std::vector<Index> selected;
    std::vector<Index> front;
    for (Index i = 0; i < ranks.size(); ++i) {
        if (ranks[i] < split.l) {
            selected.push_back(i);
        } else if (ranks[i] == split.l) {
            front.push_back(i);
        }
    }

    // Associate the survivors and the splitting front, one pair at a time.
    std::vector<Index> nearest(ranks.size(), kNoIndex);
    std::vector<double> distance(ranks.size(), std::numeric_limits<double>::infinity());
    auto associate_one = [&](Index i) {
        auto const f = normalized.row(i);
        for (Index j = 0; j < w; ++j) {
            auto const dist = projection_distance(f, refs.row(static_cast<Eigen::Index>(j)), form);
            if (nearest[i] == kNoIndex || dist < distance[i]) {
                nearest[i] = j;
                distance[i] = dist;
            }
        }
    };
    std::for_each(selected.begin(), selected.end(), associate_one);
    std::for_each(front.begin(), front.end(), associate_one);

    std::vector<Index> rho(w, 0);
    std::vector<Index> rho_prime(w, 0);
    for (auto i : selected) {
        ++rho[nearest[i]];
    }
    for (auto i : front) {
        ++rho_prime[nearest[i]];
    }

    std::vector<Index> active(w);
    for (Index j = 0; j < w; ++j) {
        active[j] = j;
    }
    std::vector<std::uint8_t> taken(ranks.size(), 0);
    std::vector<Index> ties;
    std::vector<Index> candidates;

    while (selected.size() < target) {
        if (active.empty()) {
            throw InfeasibleError("oracle niche selection ran out of reference points");
        }
        auto lowest = std::numeric_limits<Index>::max();
        for (auto j : active) {
            lowest = std::min(lowest, rho[j]);
        }
        ties.clear();
        for (Index a = 0; a < active.size(); ++a) {
            if (rho[active[a]] == lowest) {
                ties.push_back(a);
            }
        }
        auto const slot = ties[rng.below(ties.size())];
        auto const v = active[slot];

        if (rho_prime[v] == 0) {
            active.erase(active.begin() + static_cast<std::ptrdiff_t>(slot));
            continue;
        }

        candidates.clear();
        for (auto i : front) {
            if (taken[i] == 0 && nearest[i] == v) {
                candidates.push_back(i);
            }
        }
        Index pick = kNoIndex;
        if (rho[v] == 0) {
            for (auto i : candidates) {
                if (pick == kNoIndex || distance[i] < distance[pick]) {
                    pick = i;
                }
            }
        } else {
            pick = candidates[rng.below(candidates.size())];
        }
        taken[pick] = 1;
        selected.push_back(pick);
        ++rho[v];
        --rho_prime[v];
    }

    std::sort(selected.begin(), selected.end());
    return selected;
}

} // namespace tnsga
