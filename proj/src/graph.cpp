#include "glt/graph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>

namespace glt {

const char* to_string(MaskKind kind) {
    switch (kind) {
        case MaskKind::geographic: return "geographic";
        case MaskKind::long_term: return "long_term";
        case MaskKind::glt: return "glt";
        case MaskKind::free_flow: return "free_flow";
        case MaskKind::ultimate: return "ultimate";
    }
    return "?";
}

std::size_t BinaryMask::nonzeros() const {
    std::size_t count = 0;
    for (std::size_t i = 0; i < values.size(); ++i)
        if (values.data()[i] != 0.0) ++count;
    return count;
}

void validate_free_flow(const FreeFlowParams& params) {
    require(params.free_flow_mph > 0.0, Errc::bad_params, "free-flow speed must be positive");
    require(params.delta_t_minutes > 0.0, Errc::bad_params, "delta t must be positive");
    require(params.intervals >= 1, Errc::bad_params, "interval count m must be >= 1");
}

BinaryMask k_hop_similarity(const Matrix& adjacency, int k, Exec exec) {
    require(k >= 1, Errc::bad_k, "hop count must be >= 1");
    const std::size_t n = adjacency.rows();
    require(adjacency.cols() == n, Errc::bad_shape, "adjacency must be square");
    require(is_symmetric(adjacency), Errc::non_symmetric, "adjacency must be symmetric");
    for (std::size_t i = 0; i < n; ++i)
        require(adjacency(i, i) == 0.0, Errc::bad_shape, "adjacency diagonal must be zero");

    // min((A+I)^k, 1): boolean closure, one squaring-free hop at a time.
    Matrix base(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            base(i, j) = (i == j || adjacency(i, j) != 0.0) ? 1.0 : 0.0;

    Matrix reach = base;
    for (int hop = 2; hop <= k; ++hop) {
        Matrix next(n, n);
        parallel_for(n, exec, [&](std::size_t i) {
            auto out = next.row(i);
            for (std::size_t m = 0; m < n; ++m) {
                if (reach(i, m) == 0.0) continue;
                auto row = base.row(m);
                for (std::size_t j = 0; j < n; ++j)
                    if (row[j] != 0.0) out[j] = 1.0;
            }
        });
        reach = std::move(next);
    }
    return BinaryMask{std::move(reach), MaskKind::geographic, k};
}

DailyProfileSet daily_profiles(const SpeedSeries& train) {
    const int spd = train.steps_per_day();
    require(spd % 3 == 0, Errc::not_divisible_by_three,
            "steps per day (" + std::to_string(spd) + ") must be divisible by 3");
    require(train.steps() >= static_cast<std::size_t>(spd), Errc::too_short,
            "profiles need at least one full day of training data");

    const std::size_t n = train.links();
    Matrix slot_sum(static_cast<std::size_t>(spd), n);
    std::vector<std::size_t> slot_count(static_cast<std::size_t>(spd), 0);
    for (std::size_t t = 0; t < train.steps(); ++t) {
        const std::size_t slot =
            (static_cast<std::size_t>(train.start_index) + t) % static_cast<std::size_t>(spd);
        auto row = train.values.row(t);
        auto acc = slot_sum.row(slot);
        for (std::size_t j = 0; j < n; ++j) acc[j] += row[j];
        ++slot_count[slot];
    }

    const int bins = spd / 3;
    Matrix profiles(n, static_cast<std::size_t>(bins));
    for (int b = 0; b < bins; ++b) {
        for (std::size_t j = 0; j < n; ++j) {
            double mean_of_slots = 0.0;
            for (int s = 3 * b; s < 3 * b + 3; ++s) {
                const std::size_t count = slot_count[static_cast<std::size_t>(s)];
                mean_of_slots += slot_sum(static_cast<std::size_t>(s), j) /
                                 static_cast<double>(count);
            }
            profiles(j, static_cast<std::size_t>(b)) = mean_of_slots / 3.0;
        }
    }
    return DailyProfileSet{std::move(profiles)};
}

TemporalDifference temporal_difference(const DailyProfileSet& profiles, Exec exec) {
    const std::size_t n = profiles.profiles.rows();
    const std::size_t bins = profiles.profiles.cols();
    require(n >= 1 && bins >= 1, Errc::bad_shape, "empty profile set");
    require(all_finite(profiles.profiles), Errc::non_finite, "profiles must be finite");

    // Compute the upper triangle only and mirror, so symmetry is exact.
    Matrix q(n, n);
    parallel_for(n, exec, [&](std::size_t i) {
        auto pi = profiles.profiles.row(i);
        for (std::size_t j = i + 1; j < n; ++j) {
            auto pj = profiles.profiles.row(j);
            double sum = 0.0;
            for (std::size_t b = 0; b < bins; ++b) {
                const double d = pi[b] - pj[b];
                sum += d * d;
            }
            q(i, j) = std::sqrt(sum);
        }
    });
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) q(j, i) = q(i, j);
    return TemporalDifference{std::move(q), static_cast<int>(bins)};
}

BinaryMask long_term_row_selection(const TemporalDifference& q, int gamma) {
    const std::size_t n = q.values.rows();
    require(gamma >= 1 && gamma <= static_cast<int>(n) - 1, Errc::bad_gamma,
            "gamma must be in [1, N-1]");

    Matrix mask(n, n);
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) {
        order.resize(0);
        for (std::size_t j = 0; j < n; ++j)
            if (j != i) order.push_back(j);
        // Ties broken by the smaller link index: sort key (Q, j).
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            if (q.values(i, a) != q.values(i, b)) return q.values(i, a) < q.values(i, b);
            return a < b;
        });
        for (int r = 0; r < gamma; ++r) mask(i, order[static_cast<std::size_t>(r)]) = 1.0;
    }
    return BinaryMask{std::move(mask), MaskKind::long_term, 0};
}

BinaryMask long_term_similarity(const TemporalDifference& q, int gamma, bool symmetrize) {
    BinaryMask mask = long_term_row_selection(q, gamma);
    if (symmetrize) {
        const std::size_t n = mask.n();
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j)
                if (mask.values(i, j) != 0.0 || mask.values(j, i) != 0.0)
                    mask.values(i, j) = mask.values(j, i) = 1.0;
    }
    return mask;
}

BinaryMask glt_similarity(const BinaryMask& geographic_k, const BinaryMask& long_term) {
    require(geographic_k.kind == MaskKind::geographic, Errc::bad_params,
            "first operand must be a geographic mask");
    require(long_term.kind == MaskKind::long_term, Errc::bad_params,
            "second operand must be a long-term mask");
    require(geographic_k.values.same_shape(long_term.values), Errc::shape_mismatch,
            "mask sizes differ");

    Matrix sum = geographic_k.values;
    for (std::size_t i = 0; i < sum.size(); ++i) sum.data()[i] += long_term.values.data()[i];
    return BinaryMask{std::move(sum), MaskKind::glt, geographic_k.hop};
}

namespace {

bool has_sparse_distances(const Matrix& distance) {
    for (std::size_t i = 0; i < distance.rows(); ++i)
        for (std::size_t j = 0; j < distance.cols(); ++j)
            if (i != j && distance(i, j) == 0.0) return true;
    return false;
}

}  // namespace

Matrix all_pairs_distances(const Matrix& distance, Exec exec) {
    const std::size_t n = distance.rows();
    require(distance.cols() == n, Errc::bad_shape, "distance must be square");
    require(is_symmetric(distance), Errc::non_symmetric, "distance must be symmetric");

    if (!has_sparse_distances(distance)) return distance;

    // Positive entries are edge lengths; Dijkstra from every source.
    std::vector<std::vector<std::pair<std::size_t, double>>> edges(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (i != j && distance(i, j) > 0.0) edges[i].push_back({j, distance(i, j)});

    const double inf = std::numeric_limits<double>::infinity();
    Matrix dist(n, n, inf);
    parallel_for(n, exec, [&](std::size_t src) {
        auto out = dist.row(src);
        out[src] = 0.0;
        using Item = std::pair<double, std::size_t>;
        std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
        heap.push({0.0, src});
        while (!heap.empty()) {
            auto [d, v] = heap.top();
            heap.pop();
            if (d > out[v]) continue;
            for (auto [w, len] : edges[v]) {
                const double cand = d + len;
                if (cand < out[w]) {
                    out[w] = cand;
                    heap.push({cand, w});
                }
            }
        }
    });
    return dist;
}

BinaryMask free_flow_reachable(const Matrix& distance, const FreeFlowParams& params, Exec exec) {
    validate_free_flow(params);
    for (std::size_t i = 0; i < distance.rows(); ++i)
        for (std::size_t j = 0; j < distance.cols(); ++j)
            require(distance(i, j) >= 0.0, Errc::bad_params, "distances must be nonnegative");

    const Matrix full = all_pairs_distances(distance, exec);
    const double reach = params.reach_miles();
    const std::size_t n = full.rows();
    Matrix mask(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            mask(i, j) = (reach >= full(i, j)) ? 1.0 : 0.0;
    return BinaryMask{std::move(mask), MaskKind::free_flow, 0};
}

BinaryMask ultimate_similarity(const BinaryMask& glt_k, const BinaryMask& free_flow) {
    require(glt_k.values.same_shape(free_flow.values), Errc::shape_mismatch,
            "mask sizes differ");
    const std::size_t n = glt_k.n();
    Matrix out(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            out(i, j) =
                (glt_k.values(i, j) != 0.0 && free_flow.values(i, j) != 0.0) ? 1.0 : 0.0;
    return BinaryMask{std::move(out), MaskKind::ultimate, glt_k.hop};
}

GraphBundle build_graph_bundle(const RoadNetworkSpec& network, const SpeedSeries& train,
                               const GraphConfig& config, Exec exec) {
    require(config.hops >= 1, Errc::bad_k, "need at least one hop");
    validate_network(network);

    GraphBundle bundle;
    for (int k = 1; k <= config.hops; ++k)
        bundle.geographic.push_back(k_hop_similarity(network.adjacency, k, exec));

    const DailyProfileSet profiles = daily_profiles(train);
    const TemporalDifference q = temporal_difference(profiles, exec);
    bundle.long_term = long_term_similarity(q, config.gamma, config.symmetrize_long_term);

    for (int k = 1; k <= config.hops; ++k)
        bundle.glt.push_back(
            glt_similarity(bundle.geographic[static_cast<std::size_t>(k - 1)],
                           bundle.long_term));

    bundle.free_flow = free_flow_reachable(network.distance, config.free_flow, exec);

    for (int k = 1; k <= config.hops; ++k)
        bundle.ultimate.push_back(
            ultimate_similarity(bundle.glt[static_cast<std::size_t>(k - 1)],
                                bundle.free_flow));
    return bundle;
}

}  // namespace glt
