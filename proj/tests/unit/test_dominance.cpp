#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "oracles.hpp"
#include "tnsga/dominance.hpp"
#include "tnsga/errors.hpp"

using namespace tnsga;

namespace {

auto make(std::initializer_list<std::initializer_list<double>> rows) -> Matrix
{
    Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.begin()->size()));
    Eigen::Index r = 0;
    for (auto const& row : rows) {
        Eigen::Index c = 0;
        for (auto v : row) {
            m(r, c++) = v;
        }
        ++r;
    }
    return m;
}

// Objectives on a coarse grid so ties and duplicates are common.
auto random_objectives(CounterRng& rng, Index n, Index m) -> Matrix
{
    Matrix f(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m));
    auto const levels = 2 + rng.below(6);
    for (Eigen::Index r = 0; r < f.rows(); ++r) {
        for (Eigen::Index c = 0; c < f.cols(); ++c) {
            f(r, c) = static_cast<double>(rng.below(levels));
        }
    }
    return f;
}

auto as_ranks(std::vector<int> const& oracle) -> std::vector<Rank>
{
    std::vector<Rank> out;
    for (auto r : oracle) {
        out.push_back(r < 0 ? kDroppedRank : r);
    }
    return out;
}

auto with_sizes(std::vector<Index> const& sizes) -> RankVector
{
    RankVector r;
    for (Index f = 0; f < sizes.size(); ++f) {
        r.ranks.insert(r.ranks.end(), sizes[f], static_cast<Rank>(f));
    }
    return r;
}

} // namespace

TEST_CASE("dominates")
{
    auto dom = [](std::vector<double> a, std::vector<double> b) { return dominates(a, b); };
    CHECK(dom({1, 2}, {2, 3}));
    CHECK_FALSE(dom({1, 3}, {2, 2}));
    CHECK_FALSE(dom({1, 1}, {1, 1}));
    CHECK(dom({1, 1}, {1, 2}));
    CHECK_FALSE(dom({1, 2}, {1, 1}));
    CHECK_THROWS_AS(dom({1, 2}, {1, 2, 3}), ShapeError);
}

TEST_CASE("dominance_matrix")
{
    SUBCASE("single row")
    {
        auto const d = dominance_matrix(MaskedMatrix{make({{1, 2}})});
        REQUIRE(d.size() == 1);
        CHECK_FALSE(d(0, 0));
    }
    SUBCASE("two rows")
    {
        auto const d = dominance_matrix(MaskedMatrix{make({{0, 0}, {1, 1}})});
        CHECK(d(0, 1));
        CHECK_FALSE(d(1, 0));
        CHECK_FALSE(d(0, 0));
        CHECK_FALSE(d(1, 1));
    }
    SUBCASE("random 16x3 instances match pairwise calls")
    {
        CounterRng rng{16};
        for (int t = 0; t < 20; ++t) {
            auto const f = random_objectives(rng, 16, 3);
            auto const d = dominance_matrix(MaskedMatrix{f});
            for (Eigen::Index i = 0; i < 16; ++i) {
                for (Eigen::Index j = 0; j < 16; ++j) {
                    Eigen::RowVectorXd const a = f.row(i);
                    Eigen::RowVectorXd const b = f.row(j);
                    CHECK(d(static_cast<Index>(i), static_cast<Index>(j)) ==
                          dominates(std::span<double const>(a.data(), 3), std::span<double const>(b.data(), 3)));
                }
            }
        }
    }
    SUBCASE("invalid rows take no part")
    {
        auto const d = dominance_matrix(MaskedMatrix{make({{0, 0}, {1, 1}, {2, 2}}), Mask{1, 0, 1}});
        CHECK(d(0, 2));
        CHECK_FALSE(d(0, 1));
        CHECK_FALSE(d(1, 2));
    }
}

TEST_CASE("dominator_bits is the transposed dominance matrix")
{
    CounterRng rng{99};
    for (Index n : {1, 2, 63, 64, 65, 130, 200}) {
        for (Index m : {2, 3, 5}) {
            auto const f = random_objectives(rng, n, m);
            Mask valid(n);
            for (auto& v : valid) {
                v = rng.below(8) != 0 ? 1 : 0;
            }
            MaskedMatrix const mm{f, valid};
            auto const d = dominance_matrix(mm);
            auto const b = dominator_bits(mm);
            REQUIRE(b.size() == n);
            bool same = true;
            for (Index i = 0; i < n; ++i) {
                for (Index j = 0; j < n; ++j) {
                    same = same && (d(i, j) == b.dominates(i, j));
                }
            }
            CHECK(same);
        }
    }
}

TEST_CASE("non_dominated_sort examples")
{
    CHECK(non_dominated_sort(MaskedMatrix{make({{1, 1}, {1, 1}, {1, 1}})}).ranks == std::vector<Rank>{0, 0, 0});
    CHECK(non_dominated_sort(MaskedMatrix{make({{0, 2}, {2, 0}, {1, 1}, {2, 2}})}).ranks ==
          std::vector<Rank>{0, 0, 0, 1});
    CHECK(non_dominated_sort(MaskedMatrix{make({{0, 0}, {1, 1}, {2, 2}})}).ranks == std::vector<Rank>{0, 1, 2});
    CHECK(non_dominated_sort(MaskedMatrix{make({{0, 0}, {1, 1}, {2, 2}}), Mask{1, 0, 1}}).ranks ==
          std::vector<Rank>{0, kDroppedRank, 1});
}

TEST_CASE("non_dominated_sort equals the textbook sort")
{
    CounterRng rng{1234};
    for (int t = 0; t < 300; ++t) {
        auto const n = 1 + rng.below(64);
        auto const m = 1 + rng.below(8);
        Matrix f = random_objectives(rng, n, m);
        if (t % 2 == 1) {
            for (Eigen::Index r = 0; r < f.rows(); ++r) {
                for (Eigen::Index c = 0; c < f.cols(); ++c) {
                    f(r, c) = rng.uniform();
                }
            }
        }
        Mask valid(n, 1);
        if (t % 3 == 0) {
            for (auto& v : valid) {
                v = rng.below(5) != 0 ? 1 : 0;
            }
        }
        auto const got = non_dominated_sort(MaskedMatrix{f, valid});
        CHECK(got.ranks == as_ranks(testing::textbook_sort(f, valid)));
    }
}

TEST_CASE("ranks are permutation-equivariant")
{
    CounterRng rng{5};
    for (int t = 0; t < 50; ++t) {
        auto const n = 2 + rng.below(40);
        auto const f = random_objectives(rng, n, 3);
        auto const perm = random_permutation(n, rng);
        auto const base = non_dominated_sort(MaskedMatrix{f});
        auto const shuffled = non_dominated_sort(MaskedMatrix{permute_rows(f, perm)});
        for (Index i = 0; i < n; ++i) {
            CHECK(shuffled[i] == base[perm[i]]);
        }
    }
}

TEST_CASE("fronts respect dominance")
{
    CounterRng rng{8};
    auto const f = random_objectives(rng, 60, 3);
    auto const r = non_dominated_sort(MaskedMatrix{f});
    auto const d = dominance_matrix(MaskedMatrix{f});
    for (Index i = 0; i < 60; ++i) {
        for (Index j = 0; j < 60; ++j) {
            if (d(i, j)) {
                CHECK(r[i] < r[j]);
            }
        }
    }
}

TEST_CASE("split_fronts")
{
    SUBCASE("[3,3,2], n=4")
    {
        auto r = with_sizes({3, 3, 2});
        auto const s = split_fronts(r, 4);
        CHECK(s.l == 1);
        CHECK(s.selected_count == 3);
        CHECK(s.k == 1);
        CHECK(s.front_size == 3);
        CHECK_FALSE(s.fills_exactly());
        CHECK(std::count(r.ranks.begin(), r.ranks.end(), kDroppedRank) == 2);
    }
    SUBCASE("[4], n=4 fills exactly")
    {
        auto r = with_sizes({4});
        auto const s = split_fronts(r, 4);
        CHECK(s.l == 0);
        CHECK(s.selected_count == 0);
        CHECK(s.k == 4);
        CHECK(s.fills_exactly());
    }
    SUBCASE("[5,5], n=5 sends all of front 0 to niching")
    {
        auto r = with_sizes({5, 5});
        auto const s = split_fronts(r, 5);
        CHECK(s.l == 0);
        CHECK(s.selected_count == 0);
        CHECK(s.k == 5);
        CHECK(s.front_size == 5);
        CHECK(s.fills_exactly());
        CHECK(r.front_sizes() == std::vector<Index>{5});
    }
    SUBCASE("[2,3,4], n=5 fills front 1 exactly")
    {
        auto r = with_sizes({2, 3, 4});
        auto const s = split_fronts(r, 5);
        CHECK(s.l == 1);
        CHECK(s.k == 3);
        CHECK(s.fills_exactly());
    }
    SUBCASE("too few individuals")
    {
        auto r = with_sizes({2, 1});
        CHECK_THROWS_AS((void)split_fronts(r, 4), InfeasibleError);
    }
    SUBCASE("invariants on random rank vectors")
    {
        CounterRng rng{31};
        for (int t = 0; t < 200; ++t) {
            std::vector<Index> sizes(1 + rng.below(6));
            for (auto& s : sizes) {
                s = 1 + rng.below(8);
            }
            auto const total = std::accumulate(sizes.begin(), sizes.end(), Index{0});
            auto const n = 1 + rng.below(total);
            auto r = with_sizes(sizes);
            auto const s = split_fronts(r, n);
            CHECK(s.selected_count < n);
            CHECK(s.selected_count + s.front_size >= n);
            CHECK(s.k == n - s.selected_count);
            CHECK(r.count_below(s.l) == s.selected_count);
        }
    }
}
