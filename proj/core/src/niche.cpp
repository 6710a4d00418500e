#include "tnsga/niche.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>

#include <Eigen/LU>
#include <json.hpp>

#include "tnsga/errors.hpp"

namespace tnsga {

namespace {

constexpr double kAsfEpsilon = 1e-6;
constexpr double kInterceptFloor = 1e-10;

auto distance_from_cosine(double norm, double c, DistanceForm form) noexcept -> double
{
    c = std::clamp(c, -1.0, 1.0);
    if (form == DistanceForm::Perpendicular) {
        return norm * std::sqrt(std::max(0.0, 1.0 - c * c));
    }
    return norm * std::sqrt(std::max(0.0, 1.0 - c));
}

// out[j] = sum_k f[k] * units[k * w + j], fused for the common small m.
void project(double const* f, double const* units, Index m, Index w, double* out)
{
    if (m == 2) {
        double const a = f[0];
        double const b = f[1];
        double const* u0 = units;
        double const* u1 = units + w;
        for (Index j = 0; j < w; ++j) {
            out[j] = a * u0[j] + b * u1[j];
        }
        return;
    }
    if (m == 3) {
        double const a = f[0];
        double const b = f[1];
        double const c = f[2];
        double const* u0 = units;
        double const* u1 = units + w;
        double const* u2 = units + 2 * w;
        for (Index j = 0; j < w; ++j) {
            out[j] = a * u0[j] + b * u1[j] + c * u2[j];
        }
        return;
    }
    std::fill(out, out + w, 0.0);
    for (Index k = 0; k < m; ++k) {
        double const fk = f[k];
        double const* uk = units + k * w;
        for (Index j = 0; j < w; ++j) {
            out[j] += fk * uk[j];
        }
    }
}

// First index of the maximum; the max pass is branch-free so it vectorizes.
template <typename Key>
auto first_argmax(std::vector<double> const& v, Key key) -> Index
{
    auto const w = v.size();
    std::array<double, 4> lanes{key(v[0]), key(v[0]), key(v[0]), key(v[0])};
    Index j = 0;
    for (; j + 4 <= w; j += 4) {
        for (Index t = 0; t < 4; ++t) {
            auto const x = key(v[j + t]);
            lanes[t] = x > lanes[t] ? x : lanes[t];
        }
    }
    auto best = std::max({lanes[0], lanes[1], lanes[2], lanes[3]});
    for (; j < w; ++j) {
        best = std::max(best, key(v[j]));
    }
    for (Index i = 0; i < w; ++i) {
        if (key(v[i]) == best) {
            return i;
        }
    }
    return 0;
}

auto argmax_abs(std::vector<double> const& v) -> Index
{
    return first_argmax(v, [](double x) { return std::abs(x); });
}

auto argmax(std::vector<double> const& v) -> Index
{
    return first_argmax(v, [](double x) { return x; });
}

auto reference_norms(Matrix const& refs) -> Eigen::VectorXd
{
    Eigen::VectorXd norms = refs.rowwise().norm();
    for (Eigen::Index j = 0; j < norms.size(); ++j) {
        if (!(norms[j] > 0.0)) {
            throw ParameterError("reference point " + std::to_string(j) + " has zero norm");
        }
    }
    return norms;
}

auto counts_json(std::vector<Index> const& v) -> nlohmann::json
{
    auto out = nlohmann::json::array();
    for (auto c : v) {
        if (c == kDisabledCount) {
            out.push_back(nullptr);
        } else {
            out.push_back(c);
        }
    }
    return out;
}

void trace_record(NicheState const& state, char const* phase, Index iteration, std::vector<Index> const& marked,
                  std::vector<Index> const& taken)
{
    if (state.options == nullptr || state.options->trace == nullptr) {
        return;
    }
    nlohmann::json rec{{"phase", phase},
                       {"iteration", iteration},
                       {"rho", counts_json(state.counts.rho)},
                       {"rho_prime", state.counts.rho_prime},
                       {"u", marked},
                       {"taken", taken}};
    *state.options->trace << rec.dump() << '\n';
}

void verify(NicheState const& state, char const* phase)
{
    if (state.options == nullptr || !state.options->verify_counts) {
        return;
    }
    auto const w = state.counts.rho.size();
    std::vector<Index> below(w, 0);
    std::vector<Index> at(w, 0);
    Index selected = 0;
    for (Index i = 0; i < state.ranks.size(); ++i) {
        auto const r = state.ranks[i];
        if (r < state.l) {
            ++selected;
        }
        if (state.info.pi[i] == kNoIndex) {
            continue;
        }
        if (r < state.l) {
            ++below[state.info.pi[i]];
        } else if (r == state.l) {
            ++at[state.info.pi[i]];
        }
    }
    auto fail = [&](std::string const& what) {
        throw std::logic_error(std::string("niche bookkeeping drift after ") + phase + ": " + what);
    };
    if (selected != state.selected) {
        fail("selected count");
    }
    for (Index j = 0; j < w; ++j) {
        if (at[j] != state.counts.rho_prime[j]) {
            fail("rho_prime at point " + std::to_string(j));
        }
        if (state.counts.rho[j] == kDisabledCount) {
            if (at[j] != 0) {
                fail("disabled point " + std::to_string(j) + " still has candidates");
            }
        } else if (state.counts.rho[j] != below[j]) {
            fail("rho at point " + std::to_string(j));
        }
    }
}

} // namespace

void skip_consumed(NicheState const& state, CacheTable& cache, Index point)
{
    auto& s = cache.cursor[point];
    while (s < cache.width && cache.at(point, s) != kNoIndex && state.promoted[cache.at(point, s)] != 0) {
        ++s;
    }
}

auto normalize_objectives(MaskedMatrix const& objectives, Eigen::RowVectorXd& ideal, Normalization* info)
    -> MaskedMatrix
{
    auto const m = static_cast<Eigen::Index>(objectives.cols());
    auto const& valid = objectives.valid();
    Matrix const& f = objectives.data();
    if (objectives.valid_count() == 0) {
        throw EmptySelectionError("normalize_objectives: no valid rows");
    }
    if (ideal.size() == 0) {
        ideal = Eigen::RowVectorXd::Constant(m, std::numeric_limits<double>::infinity());
    } else if (ideal.size() != m) {
        throw ShapeError("normalize_objectives: ideal point has wrong length");
    }

    Eigen::RowVectorXd worst = Eigen::RowVectorXd::Constant(m, -std::numeric_limits<double>::infinity());
    for (Index i = 0; i < objectives.rows(); ++i) {
        if (valid[i] != 0) {
            ideal = ideal.cwiseMin(f.row(static_cast<Eigen::Index>(i)));
        }
    }

    Matrix translated = f.rowwise() - ideal;
    for (Index i = 0; i < objectives.rows(); ++i) {
        if (valid[i] != 0) {
            worst = worst.cwiseMax(translated.row(static_cast<Eigen::Index>(i)));
        }
    }

    // Extreme point per axis: minimizer of max_k t_k / w_k with w = e_axis + eps.
    Matrix extremes(m, m);
    for (Eigen::Index axis = 0; axis < m; ++axis) {
        Index best = kNoIndex;
        double best_asf = std::numeric_limits<double>::infinity();
        for (Index i = 0; i < objectives.rows(); ++i) {
            if (valid[i] == 0) {
                continue;
            }
            double asf = -std::numeric_limits<double>::infinity();
            for (Eigen::Index k = 0; k < m; ++k) {
                auto const weight = k == axis ? 1.0 : kAsfEpsilon;
                asf = std::max(asf, translated(static_cast<Eigen::Index>(i), k) / weight);
            }
            if (best == kNoIndex || asf < best_asf) {
                best = i;
                best_asf = asf;
            }
        }
        extremes.row(axis) = translated.row(static_cast<Eigen::Index>(best));
    }

    Eigen::RowVectorXd intercepts(m);
    bool fallback = false;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(extremes);
    bool solved = lu.isInvertible();
    if (solved) {
        Eigen::VectorXd plane = lu.solve(Eigen::VectorXd::Ones(m));
        for (Eigen::Index k = 0; k < m; ++k) {
            auto const value = 1.0 / plane[k];
            if (!std::isfinite(value) || value <= kInterceptFloor) {
                intercepts[k] = std::numeric_limits<double>::quiet_NaN();
            } else {
                intercepts[k] = value;
            }
        }
    } else {
        intercepts.setConstant(std::numeric_limits<double>::quiet_NaN());
    }
    for (Eigen::Index k = 0; k < m; ++k) {
        if (std::isnan(intercepts[k])) {
            fallback = true;
            intercepts[k] = worst[k] > kInterceptFloor ? worst[k] : 1.0;
        }
    }

    Matrix scaled = translated.array().rowwise() / intercepts.array();
    if (info != nullptr) {
        *info = {ideal, intercepts, fallback};
    }
    return MaskedMatrix{std::move(scaled), valid};
}

auto perpendicular_distance_matrix(Matrix const& normalized, Matrix const& refs, DistanceForm form) -> Matrix
{
    if (normalized.cols() != refs.cols()) {
        throw ShapeError("perpendicular_distance_matrix: objective count mismatch");
    }
    auto const ref_norms = reference_norms(refs);
    Eigen::VectorXd const f_norms = normalized.rowwise().norm();
    Matrix dots = normalized * refs.transpose();
    Matrix out(normalized.rows(), refs.rows());
    for (Eigen::Index i = 0; i < out.rows(); ++i) {
        auto const nf = f_norms[i];
        if (nf == 0.0) {
            out.row(i).setZero();
            continue;
        }
        for (Eigen::Index j = 0; j < out.cols(); ++j) {
            out(i, j) = distance_from_cosine(nf, dots(i, j) / (nf * ref_norms[j]), form);
        }
    }
    return out;
}

auto associate(Matrix const& distances, Mask const& valid) -> AssociationInfo
{
    auto const n = static_cast<Index>(distances.rows());
    if (valid.size() != n) {
        throw ShapeError("associate: mask length mismatch");
    }
    AssociationInfo info{std::vector<Index>(n, kNoIndex), std::vector<double>(n, kSentinel)};
    for (Index i = 0; i < n; ++i) {
        if (valid[i] == 0) {
            continue;
        }
        Eigen::Index best = 0;
        auto const row = distances.row(static_cast<Eigen::Index>(i));
        for (Eigen::Index j = 1; j < row.size(); ++j) {
            if (row[j] < row[best]) {
                best = j;
            }
        }
        info.pi[i] = static_cast<Index>(best);
        info.d[i] = row[best];
    }
    return info;
}

auto associate_direct(MaskedMatrix const& normalized, Matrix const& refs, DistanceForm form) -> AssociationInfo
{
    if (normalized.cols() != static_cast<Index>(refs.cols())) {
        throw ShapeError("associate_direct: objective count mismatch");
    }
    auto const n = normalized.rows();
    auto const w = static_cast<Index>(refs.rows());
    auto const m = static_cast<Index>(refs.cols());
    auto const ref_norms = reference_norms(refs);

    // Unit directions stored objective-major so the inner loop runs over points.
    std::vector<double> units(m * w);
    for (Index j = 0; j < w; ++j) {
        for (Index k = 0; k < m; ++k) {
            units[k * w + j] = refs(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) /
                               ref_norms[static_cast<Eigen::Index>(j)];
        }
    }

    AssociationInfo info{std::vector<Index>(n, kNoIndex), std::vector<double>(n, kSentinel)};
    std::vector<double> proj(w);
    Matrix const& f = normalized.data();
    for (Index i = 0; i < n; ++i) {
        if (!normalized.is_valid(i)) {
            continue;
        }
        double const* fi = f.data() + i * m;
        double norm2 = 0.0;
        for (Index k = 0; k < m; ++k) {
            norm2 += fi[k] * fi[k];
        }
        auto const nf = std::sqrt(norm2);
        if (nf == 0.0) {
            info.pi[i] = 0;
            info.d[i] = 0.0;
            continue;
        }
        project(fi, units.data(), m, w, proj.data());
        auto const best = form == DistanceForm::Perpendicular ? argmax_abs(proj) : argmax(proj);
        info.pi[i] = best;
        info.d[i] = distance_from_cosine(nf, proj[best] / nf, form);
    }
    return info;
}

auto niche_counts(AssociationInfo const& info, RankVector const& ranks, Rank l, Index refs) -> NicheCounts
{
    if (info.pi.size() != ranks.size()) {
        throw ShapeError("niche_counts: association and rank vectors differ in length");
    }
    NicheCounts counts{std::vector<Index>(refs, 0), std::vector<Index>(refs, 0)};
    for (Index i = 0; i < ranks.size(); ++i) {
        auto const p = info.pi[i];
        if (p == kNoIndex) {
            continue;
        }
        if (p >= refs) {
            throw std::out_of_range("niche_counts: reference index out of range");
        }
        if (ranks[i] < l) {
            ++counts.rho[p];
        } else if (ranks[i] == l) {
            ++counts.rho_prime[p];
        }
    }
    for (Index j = 0; j < refs; ++j) {
        if (counts.rho_prime[j] == 0) {
            counts.rho[j] = kDisabledCount;
        }
    }
    return counts;
}

auto make_niche_state(AssociationInfo info, RankVector ranks, FrontSplit const& split, Index target, Index refs,
                      NicheOptions const* options) -> NicheState
{
    auto counts = niche_counts(info, ranks, split.l, refs);
    auto const slots = ranks.size();
    NicheState state{std::move(info), std::move(counts), std::move(ranks), Mask(slots, 0), split.l, target, 0, options};
    state.selected = state.ranks.count_below(split.l);
    if (state.selected > target) {
        throw InfeasibleError("niche selection: more survivors below the splitting front than the budget");
    }
    verify(state, "counting");
    trace_record(state, "counting", 0, {}, {});
    return state;
}

auto nearest_selection(NicheState& state) -> Index
{
    auto const w = state.counts.rho.size();
    auto& rho = state.counts.rho;
    auto& rho_prime = state.counts.rho_prime;

    std::vector<Index> marked;
    for (Index j = 0; j < w; ++j) {
        if (rho[j] == 0 && rho_prime[j] > 0) {
            marked.push_back(j);
        }
    }
    if (marked.empty() || state.remaining() == 0) {
        return 0;
    }
    if (marked.size() > state.remaining()) {
        marked.resize(state.remaining());
    }

    // Nearest candidate per point, one pass over the population.
    std::vector<Index> nearest(w, kNoIndex);
    for (Index i = 0; i < state.ranks.size(); ++i) {
        if (state.ranks[i] != state.l) {
            continue;
        }
        auto const p = state.info.pi[i];
        if (nearest[p] == kNoIndex || state.info.d[i] < state.info.d[nearest[p]]) {
            nearest[p] = i;
        }
    }

    std::vector<Index> taken;
    taken.reserve(marked.size());
    for (auto j : marked) {
        auto const x = nearest[j];
        state.ranks[x] = state.l - 1;
        state.promoted[x] = 1;
        taken.push_back(x);
        rho[j] = 1;
        if (--rho_prime[j] == 0) {
            rho[j] = kDisabledCount;
        }
    }
    state.selected += taken.size();
    verify(state, "nearest selection");
    trace_record(state, "nearest", 0, marked, taken);
    return taken.size();
}

auto build_cache(NicheState const& state) -> CacheTable
{
    auto const w = state.counts.rho.size();
    auto in_front = [&](Index i) { return state.ranks[i] == state.l || state.promoted[i] != 0; };

    std::vector<Index> lengths(w, 0);
    for (Index i = 0; i < state.ranks.size(); ++i) {
        if (in_front(i)) {
            ++lengths[state.info.pi[i]];
        }
    }
    CacheTable cache;
    cache.width = w == 0 ? 0 : *std::max_element(lengths.begin(), lengths.end());
    cache.entries.assign(w * cache.width, kNoIndex);
    cache.cursor.assign(w, 0);
    std::fill(lengths.begin(), lengths.end(), 0);
    for (Index i = 0; i < state.ranks.size(); ++i) {
        if (in_front(i)) {
            auto const p = state.info.pi[i];
            cache.entries[p * cache.width + lengths[p]++] = i;
        }
    }
    for (Index j = 0; j < w; ++j) {
        skip_consumed(state, cache, j);
    }
    return cache;
}

auto batched_random_selection(NicheState& state, CacheTable& cache) -> LoopStats
{
    auto& rho = state.counts.rho;
    auto& rho_prime = state.counts.rho_prime;
    auto const w = rho.size();
    LoopStats stats;
    std::vector<Index> marked;
    std::vector<Index> taken;

    while (state.selected < state.target) {
        auto const lowest = *std::min_element(rho.begin(), rho.end());
        if (lowest == kDisabledCount) {
            throw InfeasibleError("niche selection stalled: every reference point is exhausted");
        }
        marked.clear();
        for (Index j = 0; j < w; ++j) {
            if (rho[j] == lowest) {
                marked.push_back(j);
            }
        }
        if (marked.size() > state.remaining()) {
            marked.resize(state.remaining());
        }

        taken.clear();
        for (auto j : marked) {
            auto const x = cache.at(j, cache.cursor[j]);
            state.ranks[x] = state.l - 1;
            state.promoted[x] = 1;
            taken.push_back(x);
            ++cache.cursor[j];
            skip_consumed(state, cache, j);
            rho[j] += 1;
            if (--rho_prime[j] == 0) {
                rho[j] = kDisabledCount;
            }
        }
        state.selected += taken.size();
        stats.taken += taken.size();
        ++stats.iterations;
        verify(state, "selection loop");
        trace_record(state, "loop", stats.iterations, marked, taken);
    }
    return stats;
}

auto batched_niche_select(MaskedMatrix const& normalized, Matrix const& refs, RankVector ranks,
                          FrontSplit const& split, Index target, NicheOptions const& options) -> NicheResult
{
    if (normalized.rows() != ranks.size()) {
        throw ShapeError("batched_niche_select: objective rows and rank vector differ in length");
    }
    Mask relevant(ranks.size());
    for (Index i = 0; i < ranks.size(); ++i) {
        relevant[i] = static_cast<std::uint8_t>(normalized.is_valid(i) && ranks[i] <= split.l);
    }
    auto info = associate_direct(MaskedMatrix{normalized.data(), std::move(relevant)}, refs, options.form);
    auto state = make_niche_state(std::move(info), std::move(ranks), split, target,
                                  static_cast<Index>(refs.rows()), &options);

    NicheResult result;
    result.nearest_taken = nearest_selection(state);
    if (state.remaining() > 0) {
        auto cache = build_cache(state);
        result.loop_iterations = batched_random_selection(state, cache).iterations;
    }
    result.ranks = std::move(state.ranks);
    return result;
}

auto projection_distance(Eigen::Ref<Eigen::RowVectorXd const> f, Eigen::Ref<Eigen::RowVectorXd const> z,
                         DistanceForm form) -> double
{
    double fz = 0.0;
    double zz = 0.0;
    double ff = 0.0;
    for (Eigen::Index k = 0; k < f.size(); ++k) {
        fz += f[k] * z[k];
        zz += z[k] * z[k];
        ff += f[k] * f[k];
    }
    if (form == DistanceForm::RootCosine) {
        if (ff == 0.0) {
            return 0.0;
        }
        auto const nf = std::sqrt(ff);
        return distance_from_cosine(nf, fz / (nf * std::sqrt(zz)), form);
    }
    auto const t = fz / zz;
    double dist2 = 0.0;
    for (Eigen::Index k = 0; k < f.size(); ++k) {
        auto const diff = f[k] - t * z[k];
        dist2 += diff * diff;
    }
    return std::sqrt(dist2);
}

} // namespace tnsga
