#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <boost/math/distributions/chi_squared.hpp>

namespace tnsga::testing {

namespace {

auto dominates_row(Matrix const& f, Eigen::Index a, Eigen::Index b) -> bool
{
    bool strictly = false;
    for (Eigen::Index k = 0; k < f.cols(); ++k) {
        if (f(a, k) > f(b, k)) {
            return false;
        }
        if (f(a, k) < f(b, k)) {
            strictly = true;
        }
    }
    return strictly;
}

auto chi_square_p(double statistic, double dof) -> double
{
    if (dof < 1.0) {
        return 1.0;
    }
    boost::math::chi_squared const dist(dof);
    return boost::math::cdf(boost::math::complement(dist, statistic));
}

} // namespace

auto textbook_sort(Matrix const& f, std::vector<std::uint8_t> const& valid) -> std::vector<int>
{
    auto const n = static_cast<std::size_t>(f.rows());
    std::vector<std::vector<std::size_t>> dominated(n);
    std::vector<int> count(n, 0);
    std::vector<int> rank(n, -1);
    std::vector<std::size_t> front;
    for (std::size_t p = 0; p < n; ++p) {
        if (valid[p] == 0) {
            continue;
        }
        for (std::size_t q = 0; q < n; ++q) {
            if (valid[q] == 0 || p == q) {
                continue;
            }
            if (dominates_row(f, static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(q))) {
                dominated[p].push_back(q);
            } else if (dominates_row(f, static_cast<Eigen::Index>(q), static_cast<Eigen::Index>(p))) {
                ++count[p];
            }
        }
        if (count[p] == 0) {
            rank[p] = 0;
            front.push_back(p);
        }
    }
    int level = 0;
    while (!front.empty()) {
        std::vector<std::size_t> next;
        for (auto p : front) {
            for (auto q : dominated[p]) {
                if (--count[q] == 0) {
                    rank[q] = level + 1;
                    next.push_back(q);
                }
            }
        }
        ++level;
        front = std::move(next);
    }
    return rank;
}

auto textbook_sort(Matrix const& f) -> std::vector<int>
{
    return textbook_sort(f, std::vector<std::uint8_t>(static_cast<std::size_t>(f.rows()), 1));
}

auto brute_force_igd(Matrix const& front, Matrix const& reference) -> double
{
    double total = 0.0;
    for (Eigen::Index r = 0; r < reference.rows(); ++r) {
        double best = std::numeric_limits<double>::infinity();
        for (Eigen::Index p = 0; p < front.rows(); ++p) {
            double s = 0.0;
            for (Eigen::Index k = 0; k < front.cols(); ++k) {
                auto const diff = front(p, k) - reference(r, k);
                s += diff * diff;
            }
            best = std::min(best, std::sqrt(s));
        }
        total += best;
    }
    return total / static_cast<double>(reference.rows());
}

auto line_distance(std::vector<double> const& f, std::vector<double> const& z) -> double
{
    double fz = 0.0;
    double zz = 0.0;
    for (std::size_t k = 0; k < f.size(); ++k) {
        fz += f[k] * z[k];
        zz += z[k] * z[k];
    }
    double s = 0.0;
    for (std::size_t k = 0; k < f.size(); ++k) {
        auto const r = f[k] - fz / zz * z[k];
        s += r * r;
    }
    return std::sqrt(s);
}

auto chi_square_homogeneity(std::map<std::uint64_t, std::size_t> const& a,
                            std::map<std::uint64_t, std::size_t> const& b) -> double
{
    double na = 0.0;
    double nb = 0.0;
    std::map<std::uint64_t, std::pair<double, double>> cells;
    for (auto const& [k, c] : a) {
        cells[k].first += static_cast<double>(c);
        na += static_cast<double>(c);
    }
    for (auto const& [k, c] : b) {
        cells[k].second += static_cast<double>(c);
        nb += static_cast<double>(c);
    }
    auto const share_a = na / (na + nb);
    auto const share_b = nb / (na + nb);

    std::vector<std::pair<double, double>> kept;
    std::pair<double, double> pooled{0.0, 0.0};
    for (auto const& [k, c] : cells) {
        auto const total = c.first + c.second;
        if (std::min(total * share_a, total * share_b) < 5.0) {
            pooled.first += c.first;
            pooled.second += c.second;
        } else {
            kept.push_back(c);
        }
    }
    auto const pooled_total = pooled.first + pooled.second;
    if (pooled_total > 0.0) {
        if (std::min(pooled_total * share_a, pooled_total * share_b) >= 5.0 || kept.empty()) {
            kept.push_back(pooled);
        } else {
            // Fold a still-sparse pool into the smallest kept cell.
            auto smallest = std::min_element(kept.begin(), kept.end(), [](auto const& x, auto const& y) {
                return x.first + x.second < y.first + y.second;
            });
            smallest->first += pooled.first;
            smallest->second += pooled.second;
        }
    }
    if (kept.size() < 2) {
        return 1.0;
    }
    double stat = 0.0;
    for (auto const& [ca, cb] : kept) {
        auto const total = ca + cb;
        auto const ea = total * share_a;
        auto const eb = total * share_b;
        stat += (ca - ea) * (ca - ea) / ea + (cb - eb) * (cb - eb) / eb;
    }
    return chi_square_p(stat, static_cast<double>(kept.size() - 1));
}

auto chi_square_gof(std::vector<std::size_t> const& observed, std::vector<double> const& probabilities) -> double
{
    auto const n = static_cast<double>(std::accumulate(observed.begin(), observed.end(), std::size_t{0}));
    double stat = 0.0;
    for (std::size_t i = 0; i < observed.size(); ++i) {
        auto const e = n * probabilities[i];
        auto const o = static_cast<double>(observed[i]);
        stat += (o - e) * (o - e) / e;
    }
    return chi_square_p(stat, static_cast<double>(observed.size() - 1));
}

auto mann_whitney_p(std::vector<double> const& a, std::vector<double> const& b) -> double
{
    struct Obs {
        double v;
        int group;
    };
    std::vector<Obs> all;
    for (auto v : a) {
        all.push_back({v, 0});
    }
    for (auto v : b) {
        all.push_back({v, 1});
    }
    std::sort(all.begin(), all.end(), [](Obs const& x, Obs const& y) { return x.v < y.v; });
    auto const total = static_cast<double>(all.size());
    double rank_sum_a = 0.0;
    double tie_term = 0.0;
    for (std::size_t i = 0; i < all.size();) {
        auto j = i;
        while (j < all.size() && all[j].v == all[i].v) {
            ++j;
        }
        auto const avg = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
        auto const t = static_cast<double>(j - i);
        tie_term += t * t * t - t;
        for (auto q = i; q < j; ++q) {
            if (all[q].group == 0) {
                rank_sum_a += avg;
            }
        }
        i = j;
    }
    auto const n1 = static_cast<double>(a.size());
    auto const n2 = static_cast<double>(b.size());
    auto const u = rank_sum_a - n1 * (n1 + 1.0) / 2.0;
    auto const mu = n1 * n2 / 2.0;
    auto const var = n1 * n2 / 12.0 * ((total + 1.0) - tie_term / (total * (total - 1.0)));
    if (var <= 0.0) {
        return 1.0;
    }
    auto const diff = std::max(std::abs(u - mu) - 0.5, 0.0);
    auto const z = diff / std::sqrt(var);
    return std::erfc(z / std::sqrt(2.0));
}

auto median(std::vector<double> v) -> double
{
    std::sort(v.begin(), v.end());
    auto const n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

auto repair_by_prefix_search(KnapsackInstance const& inst, std::vector<std::uint8_t> const& selection)
    -> std::vector<int>
{
    std::vector<int> packed;
    for (int i = 0; i < inst.items; ++i) {
        if (selection[static_cast<std::size_t>(i)] != 0) {
            packed.push_back(i);
        }
    }
    auto ratio = [&](int i) {
        double best = 0.0;
        for (auto const& p : inst.profits) {
            best = std::max(best, p[static_cast<std::size_t>(i)]);
        }
        return best / inst.weights[static_cast<std::size_t>(i)];
    };
    std::stable_sort(packed.begin(), packed.end(), [&](int x, int y) { return ratio(x) < ratio(y); });
    for (std::size_t len = 0; len <= packed.size(); ++len) {
        double weight = 0.0;
        for (std::size_t q = len; q < packed.size(); ++q) {
            weight += inst.weights[static_cast<std::size_t>(packed[q])];
        }
        if (weight <= inst.capacity) {
            return {packed.begin(), packed.begin() + static_cast<std::ptrdiff_t>(len)};
        }
    }
    return packed;
}

auto mnk_scalar(MnkInstance const& inst, std::vector<int> const& bits) -> std::vector<double>
{
    std::vector<double> out;
    auto const width = std::size_t{1} << static_cast<unsigned>(inst.epistasis + 1);
    for (int o = 0; o < inst.objectives; ++o) {
        double sum = 0.0;
        for (int i = 0; i < inst.bits; ++i) {
            // bit i is the most significant digit, followed by its neighbours in order
            std::size_t code = 0;
            std::size_t weight = width / 2;
            code += static_cast<std::size_t>(bits[static_cast<std::size_t>(i)]) * weight;
            for (int t = 0; t < inst.epistasis; ++t) {
                weight /= 2;
                auto const nb = inst.neighbors[static_cast<std::size_t>(o)]
                                              [static_cast<std::size_t>(i * inst.epistasis + t)];
                code += static_cast<std::size_t>(bits[static_cast<std::size_t>(nb)]) * weight;
            }
            sum += inst.contributions[static_cast<std::size_t>(o)][static_cast<std::size_t>(i) * width + code];
        }
        out.push_back(-sum / inst.bits);
    }
    return out;
}

auto dtlz_scalar(DtlzKind kind, int m, std::vector<double> const& x) -> std::vector<double>
{
    auto const pi = std::acos(-1.0);
    auto const d = static_cast<int>(x.size());
    auto const k = d - m + 1;
    std::vector<double> f(static_cast<std::size_t>(m));
    double g = 0.0;
    for (int i = m - 1; i < d; ++i) {
        auto const v = x[static_cast<std::size_t>(i)];
        switch (kind) {
        case DtlzKind::Dtlz3:
            g += (v - 0.5) * (v - 0.5) - std::cos(20.0 * pi * (v - 0.5));
            break;
        case DtlzKind::Dtlz7:
            g += v;
            break;
        default:
            g += (v - 0.5) * (v - 0.5);
        }
    }
    if (kind == DtlzKind::Dtlz3) {
        g = 100.0 * (k + g);
    }
    if (kind == DtlzKind::Dtlz7) {
        g = 1.0 + 9.0 * g / k;
        double h = m;
        for (int j = 0; j < m - 1; ++j) {
            auto const fj = x[static_cast<std::size_t>(j)];
            f[static_cast<std::size_t>(j)] = fj;
            h -= fj / (1.0 + g) * (1.0 + std::sin(3.0 * pi * fj));
        }
        f[static_cast<std::size_t>(m - 1)] = (1.0 + g) * h;
        return f;
    }
    std::vector<double> theta(static_cast<std::size_t>(m - 1));
    for (int i = 0; i < m - 1; ++i) {
        auto const v = x[static_cast<std::size_t>(i)];
        if (kind == DtlzKind::Dtlz5 && i > 0) {
            theta[static_cast<std::size_t>(i)] = pi / (4.0 * (1.0 + g)) * (1.0 + 2.0 * g * v);
        } else {
            theta[static_cast<std::size_t>(i)] = v * pi / 2.0;
        }
    }
    // f_j = (1+g) * prod_{i < m-1-j} cos(theta_i) * (j > 0 ? sin(theta_{m-1-j}) : 1)
    for (int j = 0; j < m; ++j) {
        double v = 1.0 + g;
        for (int i = 0; i < m - 1 - j; ++i) {
            v *= std::cos(theta[static_cast<std::size_t>(i)]);
        }
        if (j > 0) {
            v *= std::sin(theta[static_cast<std::size_t>(m - 1 - j)]);
        }
        f[static_cast<std::size_t>(j)] = v;
    }
    return f;
}

} // namespace tnsga::testing
