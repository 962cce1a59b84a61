#pragma once

#include <string>
#include <vector>

#include "glt/data.hpp"
#include "glt/matrix.hpp"
#include "glt/parallel.hpp"

namespace glt {

enum class MaskKind { geographic, long_term, glt, free_flow, ultimate };

const char* to_string(MaskKind kind);

// N x N link-pair mask. Entries are 0/1 except for kind glt, where the sum
// of the geographic and long-term masks may produce a 2; downstream masks
// only ever consume the support.
struct BinaryMask {
    Matrix values;
    MaskKind kind = MaskKind::geographic;
    int hop = 0;  // k for geographic/glt/ultimate kinds, 0 otherwise

    std::size_t n() const { return values.rows(); }
    bool connected(std::size_t i, std::size_t j) const { return values(i, j) != 0.0; }
    std::size_t nonzeros() const;
};

// Pooled average-day speed profile per link, computed from training steps
// only. bins = steps_per_day / 3 (96 for 5-minute data).
struct DailyProfileSet {
    Matrix profiles;  // N x bins, mph
};

// Pairwise Euclidean distance between links' pooled daily profiles.
struct TemporalDifference {
    Matrix values;  // N x N, symmetric, zero diagonal
    int profile_bins = 96;
};

struct FreeFlowParams {
    double free_flow_mph = 60.0;
    double delta_t_minutes = 20.0;
    int intervals = 1;  // m, the number of time quanta considered

    double reach_miles() const { return free_flow_mph * intervals * delta_t_minutes / 60.0; }
};

void validate_free_flow(const FreeFlowParams& params);

// --- mask construction ----------------------------------------------------

// Pairs within graph distance k: min((A+I)^k, 1). Unit diagonal.
BinaryMask k_hop_similarity(const Matrix& adjacency, int k, Exec exec = Exec::parallel);

// Per-slot mean across training days followed by mean-pooling of
// consecutive slot triples.
DailyProfileSet daily_profiles(const SpeedSeries& train);

TemporalDifference temporal_difference(const DailyProfileSet& profiles,
                                       Exec exec = Exec::parallel);

// Row-wise top-gamma selection over Q (self excluded, ties to the smaller
// link index). Not symmetric in general; kept for inspection.
BinaryMask long_term_row_selection(const TemporalDifference& q, int gamma);

// The mask used downstream: row selection OR-symmetrized unless disabled.
BinaryMask long_term_similarity(const TemporalDifference& q, int gamma,
                                bool symmetrize = true);

// Element-wise sum of a geographic k-hop mask and the long-term mask.
BinaryMask glt_similarity(const BinaryMask& geographic_k, const BinaryMask& long_term);

// All-pairs roadway distances. A distance matrix with zeros off the
// diagonal is treated as sparse per-edge lengths and completed by running
// shortest paths over its positive entries; unreachable pairs become +inf.
Matrix all_pairs_distances(const Matrix& distance, Exec exec = Exec::parallel);

// Pairs a vehicle at free-flow speed covers within m * delta_t.
BinaryMask free_flow_reachable(const Matrix& distance, const FreeFlowParams& params,
                               Exec exec = Exec::parallel);

// Hadamard product of S_GLT^k and S_F, clipped to {0,1}.
BinaryMask ultimate_similarity(const BinaryMask& glt_k, const BinaryMask& free_flow);

// --- whole-pipeline convenience --------------------------------------------

struct GraphConfig {
    int hops = 3;       // K
    int gamma = 3;      // long-term neighbours kept per link
    FreeFlowParams free_flow;
    bool symmetrize_long_term = true;
};

// Every mask of the construction pipeline, hops 1..K.
struct GraphBundle {
    std::vector<BinaryMask> geographic;  // S_G^k
    BinaryMask long_term;                // S_LT
    std::vector<BinaryMask> glt;         // S_GLT^k
    BinaryMask free_flow;                // S_F
    std::vector<BinaryMask> ultimate;    // S_U^k
};

GraphBundle build_graph_bundle(const RoadNetworkSpec& network, const SpeedSeries& train,
                               const GraphConfig& config, Exec exec = Exec::parallel);

}  // namespace glt
