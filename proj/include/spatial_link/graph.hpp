#pragma once

#include "spatial_link/bands.hpp"
#include "spatial_link/delaunay.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace spatial_link {

enum class DistanceMetric { Euclidean, Chebyshev };

// Edge-weight rule in force for a graph.
//   Standard: +1 iff both endpoints pass their field filter and change signs match.
//   Cmad:     +1 iff every Source endpoint is mask-anomalous and every Target
//             endpoint passes the target band filter.
//   Aar:      +1 iff both endpoint values reach the elevation threshold.
enum class WeightVariant { Standard, Cmad, Aar };

std::string to_string(DistanceMetric m);
std::string to_string(WeightVariant v);
DistanceMetric parse_metric(const std::string& s);
WeightVariant parse_variant(const std::string& s);

struct GraphNode {
    std::size_t id = 0;
    std::size_t row = 0;
    std::size_t col = 0;
    NodeKind kind = NodeKind::Source;
    double value = 0.0;
    bool anomalous = false;
};

struct GraphEdge {
    std::size_t u = 0;  // u < v
    std::size_t v = 0;
    int weight = 1;     // +1 or -1
    double distance = 0.0;
};

struct GraphParams {
    double d_max = 11.0;  // cell units, or km for the AAR variant
    DistanceMetric metric = DistanceMetric::Euclidean;
    WeightVariant variant = WeightVariant::Standard;
    BandFilter source_filter;
    BandFilter target_filter;
    double elevation_threshold = 0.0;
};

// Per-node state that the weight rule reads. Permutation nulls swap these
// between cells while node geometry stays fixed.
struct NodeAttr {
    double value = 0.0;
    bool anomalous = false;
};

inline int sign_of(double v) noexcept { return (v > 0.0) - (v < 0.0); }

bool node_passes(const GraphParams& params, NodeKind kind, const NodeAttr& attr) noexcept;

bool positive_link(const GraphParams& params, NodeKind ku, const NodeAttr& au, NodeKind kv,
                   const NodeAttr& av) noexcept;

class SpatialGraph {
public:
    struct Neighbor {
        std::size_t node;
        std::size_t edge;
    };

    SpatialGraph() = default;
    SpatialGraph(std::vector<GraphNode> nodes, std::vector<GraphEdge> edges, GraphParams params);

    const std::vector<GraphNode>& nodes() const noexcept { return nodes_; }
    const std::vector<GraphEdge>& edges() const noexcept { return edges_; }
    const GraphParams& params() const noexcept { return params_; }
    std::span<const Neighbor> neighbors(std::size_t node) const noexcept { return adjacency_[node]; }

    std::size_t node_count() const noexcept { return nodes_.size(); }
    // Edge index joining u and v, or npos.
    std::size_t find_edge(std::size_t u, std::size_t v) const noexcept;
    // Node id at a cell, or npos.
    std::size_t node_at(std::size_t row, std::size_t col) const noexcept;

    NodeAttr attr(std::size_t node) const noexcept {
        return {nodes_[node].value, nodes_[node].anomalous};
    }

    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

private:
    std::vector<GraphNode> nodes_;
    std::vector<GraphEdge> edges_;
    std::vector<std::vector<Neighbor>> adjacency_;  // ascending neighbour id
    GraphParams params_;
};

double grid_distance(std::size_t r0, std::size_t c0, std::size_t r1, std::size_t c1,
                     DistanceMetric metric = DistanceMetric::Euclidean) noexcept;

// Keeps exactly the edges whose endpoint distance is <= d_max.
std::vector<IndexEdge> filter_edges_by_distance(std::span<const IndexEdge> edges,
                                                std::span<const LatticePoint> points, double d_max,
                                                DistanceMetric metric = DistanceMetric::Euclidean);

// Nodes from the two cell sets, ordered by (row, col); a cell present in both
// is kept as Target.
std::vector<GraphNode> merge_cell_sets(const CellSet& source, const CellSet& target);

// Admits candidate edges whose endpoints both pass their own field's filter and
// weights them by sign agreement.
SpatialGraph assign_edge_weights(std::vector<GraphNode> nodes,
                                 std::span<const IndexEdge> candidates, const GraphParams& params);

// CMAD variant: every candidate edge is admitted; node anomaly bits are read
// from `anomaly_mask` (non-zero valid cell = anomalous). Throws MaskDimMismatch
// when the mask shape differs from rows x cols.
SpatialGraph assign_edge_weights_cmad(std::vector<GraphNode> nodes,
                                      std::span<const IndexEdge> candidates,
                                      const ChangeGrid& anomaly_mask, std::size_t rows,
                                      std::size_t cols, GraphParams params);

// Delaunay over the union of both sets, distance filter, then weights.
// Throws EmptySide when either set is empty.
SpatialGraph build_graph(const CellSet& source, const CellSet& target, const GraphParams& params);

SpatialGraph build_graph_cmad(const CellSet& source, const CellSet& target,
                              const ChangeGrid& anomaly_mask, std::size_t rows, std::size_t cols,
                              GraphParams params);

// Candidate edges for a node list: Delaunay then distance filter.
std::vector<IndexEdge> candidate_edges(std::span<const GraphNode> nodes, double d_max,
                                       DistanceMetric metric);

}  // namespace spatial_link
