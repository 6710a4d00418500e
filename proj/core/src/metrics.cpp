#include "tnsga/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "tnsga/dominance.hpp"
#include "tnsga/errors.hpp"

namespace tnsga {

namespace {

using Point = std::vector<double>;

auto retained_points(Matrix const& front, Eigen::RowVectorXd const& ref) -> std::vector<Point>
{
    if (front.cols() != ref.size()) {
        throw ShapeError("hypervolume: reference point width mismatch");
    }
    std::vector<Point> pts;
    for (Eigen::Index r = 0; r < front.rows(); ++r) {
        if ((front.row(r).array() < ref.array()).all()) {
            pts.emplace_back(front.row(r).begin(), front.row(r).end());
        }
    }
    return pts;
}

// Points sorted by x ascending; area dominated up to (rx, ry).
auto area_2d(std::vector<std::pair<double, double>> const& sorted, double rx, double ry) -> double
{
    double area = 0.0;
    double ceiling = ry;
    for (auto const& [x, y] : sorted) {
        if (y < ceiling) {
            area += (rx - x) * (ceiling - y);
            ceiling = y;
        }
    }
    return area;
}

auto exact_hv(std::vector<Point> pts, Eigen::RowVectorXd const& ref) -> double
{
    auto const m = ref.size();
    if (pts.empty()) {
        return 0.0;
    }
    if (m == 1) {
        double best = ref[0];
        for (auto const& p : pts) {
            best = std::min(best, p[0]);
        }
        return ref[0] - best;
    }
    if (m == 2) {
        std::vector<std::pair<double, double>> xy;
        xy.reserve(pts.size());
        for (auto const& p : pts) {
            xy.emplace_back(p[0], p[1]);
        }
        std::sort(xy.begin(), xy.end());
        return area_2d(xy, ref[0], ref[1]);
    }

    // m == 3: sweep slabs along the last objective.
    std::sort(pts.begin(), pts.end(), [](Point const& a, Point const& b) { return a[2] < b[2]; });
    std::vector<std::pair<double, double>> slab;
    slab.reserve(pts.size());
    double volume = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        std::pair<double, double> const xy{pts[i][0], pts[i][1]};
        slab.insert(std::upper_bound(slab.begin(), slab.end(), xy), xy);
        auto const next_z = i + 1 < pts.size() ? pts[i + 1][2] : ref[2];
        auto const height = next_z - pts[i][2];
        if (height > 0.0) {
            volume += area_2d(slab, ref[0], ref[1]) * height;
        }
    }
    return volume;
}

} // namespace

auto igd(Matrix const& front, Matrix const& reference) -> double
{
    if (front.rows() == 0 || reference.rows() == 0) {
        throw ParameterError("igd: empty front or reference set");
    }
    if (front.cols() != reference.cols()) {
        throw ShapeError("igd: objective count mismatch");
    }
    double total = 0.0;
    for (Eigen::Index r = 0; r < reference.rows(); ++r) {
        double best = std::numeric_limits<double>::infinity();
        for (Eigen::Index f = 0; f < front.rows(); ++f) {
            best = std::min(best, (front.row(f) - reference.row(r)).squaredNorm());
        }
        total += std::sqrt(best);
    }
    return total / static_cast<double>(reference.rows());
}

auto hypervolume(Matrix const& front, Eigen::RowVectorXd const& ref, HypervolumeOptions const& options)
    -> HypervolumeResult
{
    if (ref.size() > 3) {
        return hypervolume_monte_carlo(front, ref, options);
    }
    return {exact_hv(retained_points(front, ref), ref), 0.0, true};
}

auto hypervolume_monte_carlo(Matrix const& front, Eigen::RowVectorXd const& ref, HypervolumeOptions const& options)
    -> HypervolumeResult
{
    auto const pts = retained_points(front, ref);
    auto const m = static_cast<Index>(ref.size());
    if (pts.empty() || options.samples == 0) {
        return {0.0, 0.0, false};
    }
    std::vector<double> lower(m, std::numeric_limits<double>::infinity());
    for (auto const& p : pts) {
        for (Index k = 0; k < m; ++k) {
            lower[k] = std::min(lower[k], p[k]);
        }
    }
    double box = 1.0;
    for (Index k = 0; k < m; ++k) {
        box *= ref[static_cast<Eigen::Index>(k)] - lower[k];
    }

    CounterRng rng{options.seed, 0x4856ULL};
    std::vector<double> s(m);
    Index hits = 0;
    for (Index t = 0; t < options.samples; ++t) {
        for (Index k = 0; k < m; ++k) {
            s[k] = lower[k] + rng.uniform() * (ref[static_cast<Eigen::Index>(k)] - lower[k]);
        }
        for (auto const& p : pts) {
            bool covered = true;
            for (Index k = 0; k < m && covered; ++k) {
                covered = p[k] <= s[k];
            }
            if (covered) {
                ++hits;
                break;
            }
        }
    }
    auto const n = static_cast<double>(options.samples);
    auto const frac = static_cast<double>(hits) / n;
    return {box * frac, box * std::sqrt(frac * (1.0 - frac) / n), false};
}

auto hv_scale(std::vector<Matrix> const& fronts) -> HvScale
{
    if (fronts.empty()) {
        throw ParameterError("hv_scale: no fronts");
    }
    auto const m = fronts.front().cols();
    Eigen::RowVectorXd hi = Eigen::RowVectorXd::Constant(m, -std::numeric_limits<double>::infinity());
    Eigen::RowVectorXd lo = Eigen::RowVectorXd::Constant(m, std::numeric_limits<double>::infinity());
    for (auto const& f : fronts) {
        if (f.cols() != m) {
            throw ShapeError("hv_scale: fronts differ in objective count");
        }
        for (Eigen::Index r = 0; r < f.rows(); ++r) {
            hi = hi.cwiseMax(f.row(r));
            lo = lo.cwiseMin(f.row(r));
        }
    }
    HvScale scale{1.01 * hi, 0.9 * lo, 1.0};
    for (Eigen::Index k = 0; k < m; ++k) {
        scale.hv_max *= scale.ref[k] - scale.ideal[k];
    }
    if (!std::isfinite(scale.hv_max)) {
        scale.hv_max = 0.0;
    }
    return scale;
}

auto normalized_hv(std::vector<Matrix> const& fronts, HypervolumeOptions const& options) -> NormalizedHv
{
    NormalizedHv out;
    out.scale = hv_scale(fronts);
    out.degenerate = !(out.scale.hv_max > 0.0);
    for (auto const& f : fronts) {
        auto const raw = hypervolume(f, out.scale.ref, options).value;
        out.raw.push_back(raw);
        out.normalized.push_back(out.degenerate ? 0.0 : raw / out.scale.hv_max);
    }
    return out;
}

auto nondominated_rows(Matrix const& objectives) -> Matrix
{
    auto const ranks = non_dominated_sort(MaskedMatrix{objectives});
    std::vector<Eigen::Index> keep;
    for (Index i = 0; i < ranks.size(); ++i) {
        if (ranks[i] == 0) {
            keep.push_back(static_cast<Eigen::Index>(i));
        }
    }
    Matrix out(static_cast<Eigen::Index>(keep.size()), objectives.cols());
    for (std::size_t r = 0; r < keep.size(); ++r) {
        out.row(static_cast<Eigen::Index>(r)) = objectives.row(keep[r]);
    }
    return out;
}

} // namespace tnsga
