#include <doctest.h>

#include <cmath>
#include <functional>
#include <set>
#include <sstream>
#include <vector>

#include "tnsga/errors.hpp"
#include "tnsga/refpoints.hpp"

using namespace tnsga;

namespace {

// All nonnegative integer vectors of length m summing to h.
auto compositions(int m, int h) -> std::vector<std::vector<long>>
{
    std::vector<std::vector<long>> out;
    std::vector<long> cur;
    std::function<void(int, int)> rec = [&](int left, int slots) {
        if (slots == 1) {
            cur.push_back(left);
            out.push_back(cur);
            cur.pop_back();
            return;
        }
        for (int v = 0; v <= left; ++v) {
            cur.push_back(v);
            rec(left - v, slots - 1);
            cur.pop_back();
        }
    };
    rec(h, m);
    return out;
}

// Distinct points of the two-layer set, compared exactly over the common
// denominator 2 m outer inner.
auto two_layer_count(int m, int outer, int inner) -> std::size_t
{
    std::set<std::vector<long>> pts;
    long const scale_outer = 2L * m * std::max(inner, 1);
    for (auto c : compositions(m, outer)) {
        for (auto& v : c) {
            v *= scale_outer;
        }
        pts.insert(c);
    }
    if (inner > 0) {
        for (auto c : compositions(m, inner)) {
            for (auto& v : c) {
                v = (v * m + inner) * outer;
            }
            pts.insert(c);
        }
    }
    return pts.size();
}

void check_simplex(ReferencePointSet const& s)
{
    std::set<std::vector<double>> rows;
    for (Eigen::Index r = 0; r < s.points.rows(); ++r) {
        CHECK(std::abs(s.points.row(r).sum() - 1.0) <= 1e-12);
        CHECK(s.points.row(r).minCoeff() >= 0.0);
        rows.insert(std::vector<double>(s.points.row(r).begin(), s.points.row(r).end()));
    }
    CHECK(rows.size() == s.size());
}

} // namespace

TEST_CASE("das_dennis examples")
{
    auto const a = das_dennis(2, 4);
    REQUIRE(a.size() == 5);
    std::set<std::pair<double, double>> got;
    for (Eigen::Index r = 0; r < 5; ++r) {
        got.insert({a.points(r, 0), a.points(r, 1)});
    }
    CHECK(got == std::set<std::pair<double, double>>{{0, 1}, {0.25, 0.75}, {0.5, 0.5}, {0.75, 0.25}, {1, 0}});

    auto const b = das_dennis(3, 1);
    REQUIRE(b.size() == 3);
    CHECK((b.points.colwise().sum().array() == 1.0).all());
    CHECK((b.points.rowwise().maxCoeff().array() == 1.0).all());

    CHECK(das_dennis(3, 12).size() == 91);
}

TEST_CASE("das_dennis parameter errors")
{
    CHECK_THROWS_AS((void)das_dennis(1, 4), ParameterError);
    CHECK_THROWS_AS((void)das_dennis(3, 0), ParameterError);
    CHECK_THROWS_AS((void)two_layer(3, 2, -1), ParameterError);
    CHECK_THROWS_AS((void)two_layer(1, 2, 1), ParameterError);
}

TEST_CASE("lattice count matches enumeration for m <= 6, H <= 12")
{
    for (int m = 2; m <= 6; ++m) {
        for (int h = 1; h <= 12; ++h) {
            auto const s = das_dennis(m, h);
            auto const expect = compositions(m, h).size();
            CHECK(s.size() == expect);
            CHECK(lattice_size(m, h) == expect);
            CHECK(lattice_size(m, h) == binomial(static_cast<std::uint64_t>(h + m - 1), static_cast<std::uint64_t>(m - 1)));
            if (h % 4 == 0) {
                check_simplex(s);
            }
        }
    }
}

TEST_CASE("two_layer examples")
{
    auto const a = two_layer(3, 1, 0);
    CHECK(a.size() == 3);

    auto const b = two_layer(3, 2, 1);
    CHECK(b.size() == 9);
    check_simplex(b);

    // the inner copy of (1,0,0) is shrunk to (2/3, 1/6, 1/6)
    bool found = false;
    for (Eigen::Index r = 0; r < b.points.rows(); ++r) {
        if (std::abs(b.points(r, 0) - 2.0 / 3.0) < 1e-15 && std::abs(b.points(r, 1) - 1.0 / 6.0) < 1e-15 &&
            std::abs(b.points(r, 2) - 1.0 / 6.0) < 1e-15) {
            found = true;
        }
    }
    CHECK(found);
}

TEST_CASE("two_layer removes points shared by both layers")
{
    // inner H=3, m=3 contains the centroid, which the outer H=3 lattice also holds
    CHECK(two_layer(3, 3, 3).size() == two_layer_count(3, 3, 3));
    CHECK(two_layer(3, 3, 3).size() < 2 * lattice_size(3, 3));
    for (int m = 3; m <= 7; ++m) {
        for (int o = 1; o <= 4; ++o) {
            for (int i = 0; i <= o; ++i) {
                auto const s = two_layer(m, o, i);
                CHECK(s.size() == two_layer_count(m, o, i));
                check_simplex(s);
            }
        }
    }
}

TEST_CASE("choose_divisions")
{
    CHECK(choose_divisions(3, 91) == LatticeParams{12, 0});
    CHECK(choose_divisions(3, 90) == LatticeParams{11, 0});
    CHECK(choose_divisions(2, 100) == LatticeParams{99, 0});
    CHECK(choose_divisions(5, 5) == LatticeParams{1, 0});

    SUBCASE("six objectives pick the largest two-layer set within budget")
    {
        auto const p = choose_divisions(6, 132);
        auto const count = make_reference_points(6, p).size();
        CHECK(count <= 132);
        CHECK(p.outer >= p.inner);
        std::size_t best = 0;
        for (int o = 1; o <= 8; ++o) {
            for (int i = 0; i <= o; ++i) {
                auto const c = two_layer_count(6, o, i);
                if (c <= 132) {
                    best = std::max(best, c);
                }
            }
        }
        CHECK(count == best);
    }

    SUBCASE("w stays within [m, target]")
    {
        for (int m = 2; m <= 8; ++m) {
            for (Index target : {Index(m), Index(m + 1), Index(50), Index(200)}) {
                if (target < static_cast<Index>(m)) {
                    continue;
                }
                auto const w = make_reference_points(m, choose_divisions(m, target)).size();
                CHECK(w <= target);
                CHECK(w >= static_cast<Index>(m));
            }
        }
    }
    CHECK_THROWS_AS((void)choose_divisions(4, 3), ParameterError);
}

TEST_CASE("write_csv emits one row per point")
{
    std::ostringstream out;
    write_csv(out, das_dennis(2, 2));
    CHECK(out.str() == "0,1\n0.5,0.5\n1,0\n");
}
