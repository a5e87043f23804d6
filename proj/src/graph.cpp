#include "spatial_link/graph.hpp"

#include "spatial_link/error.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace spatial_link {

std::string to_string(DistanceMetric m) {
    return m == DistanceMetric::Euclidean ? "euclidean" : "chebyshev";
}

std::string to_string(WeightVariant v) {
    switch (v) {
        case WeightVariant::Standard: return "standard";
        case WeightVariant::Cmad: return "cmad";
        case WeightVariant::Aar: return "aar";
    }
    return "?";
}

DistanceMetric parse_metric(const std::string& s) {
    if (s == "euclidean") return DistanceMetric::Euclidean;
    if (s == "chebyshev") return DistanceMetric::Chebyshev;
    throw Error(module::spatial_graph, ErrorCode::InvalidArgument, "unknown metric '" + s + "'");
}

WeightVariant parse_variant(const std::string& s) {
    if (s == "standard") return WeightVariant::Standard;
    if (s == "cmad") return WeightVariant::Cmad;
    if (s == "aar") return WeightVariant::Aar;
    throw Error(module::spatial_graph, ErrorCode::InvalidArgument, "unknown variant '" + s + "'");
}

bool node_passes(const GraphParams& p, NodeKind kind, const NodeAttr& a) noexcept {
    switch (p.variant) {
        case WeightVariant::Standard:
            if (kind == NodeKind::Source) return p.source_filter.passes(a.value);
            if (kind == NodeKind::Target) return p.target_filter.passes(a.value);
            return false;
        case WeightVariant::Cmad:
            if (kind == NodeKind::Source) return a.anomalous;
            if (kind == NodeKind::Target) return p.target_filter.passes(a.value);
            return false;
        case WeightVariant::Aar:
            return std::isfinite(a.value) && a.value >= p.elevation_threshold;
    }
    return false;
}

bool positive_link(const GraphParams& p, NodeKind ku, const NodeAttr& au, NodeKind kv,
                   const NodeAttr& av) noexcept {
    if (!node_passes(p, ku, au) || !node_passes(p, kv, av)) return false;
    if (p.variant == WeightVariant::Standard) return sign_of(au.value) == sign_of(av.value);
    return true;
}

SpatialGraph::SpatialGraph(std::vector<GraphNode> nodes, std::vector<GraphEdge> edges,
                           GraphParams params)
    : nodes_(std::move(nodes)), edges_(std::move(edges)), params_(std::move(params)) {
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        if (nodes_[i].id != i) {
            throw Error(module::spatial_graph, ErrorCode::InvalidArgument, "node ids must be dense");
        }
    }
    for (auto& edge : edges_)
        if (edge.u > edge.v) std::swap(edge.u, edge.v);
    std::sort(edges_.begin(), edges_.end(),
              [](const GraphEdge& a, const GraphEdge& b) { return std::tie(a.u, a.v) < std::tie(b.u, b.v); });
    adjacency_.assign(nodes_.size(), {});
    for (std::size_t e = 0; e < edges_.size(); ++e) {
        const auto& edge = edges_[e];
        if (edge.u == edge.v || edge.v >= nodes_.size()) {
            throw Error(module::spatial_graph, ErrorCode::InvalidArgument,
                        "edge endpoints must be distinct existing nodes");
        }
        if (e > 0 && edges_[e - 1].u == edge.u && edges_[e - 1].v == edge.v) {
            throw Error(module::spatial_graph, ErrorCode::InvalidArgument, "parallel edge");
        }
        if (edge.weight != 1 && edge.weight != -1) {
            throw Error(module::spatial_graph, ErrorCode::InvalidArgument, "edge weight must be +1 or -1");
        }
        adjacency_[edge.u].push_back({edge.v, e});
        adjacency_[edge.v].push_back({edge.u, e});
    }
    for (auto& adj : adjacency_)
        std::sort(adj.begin(), adj.end(), [](const Neighbor& a, const Neighbor& b) { return a.node < b.node; });
}

std::size_t SpatialGraph::find_edge(std::size_t u, std::size_t v) const noexcept {
    if (u >= adjacency_.size()) return npos;
    const auto& adj = adjacency_[u];
    auto it = std::lower_bound(adj.begin(), adj.end(), v,
                               [](const Neighbor& n, std::size_t x) { return n.node < x; });
    return (it != adj.end() && it->node == v) ? it->edge : npos;
}

std::size_t SpatialGraph::node_at(std::size_t row, std::size_t col) const noexcept {
    auto it = std::lower_bound(nodes_.begin(), nodes_.end(), std::pair{row, col},
                               [](const GraphNode& n, const std::pair<std::size_t, std::size_t>& rc) {
                                   return std::pair{n.row, n.col} < rc;
                               });
    if (it != nodes_.end() && it->row == row && it->col == col) return it->id;
    // Nodes are not required to be (row, col) ordered for hand-built graphs.
    for (const auto& n : nodes_)
        if (n.row == row && n.col == col) return n.id;
    return npos;
}

double grid_distance(std::size_t r0, std::size_t c0, std::size_t r1, std::size_t c1,
                     DistanceMetric metric) noexcept {
    const double dr = std::abs(static_cast<double>(r0) - static_cast<double>(r1));
    const double dc = std::abs(static_cast<double>(c0) - static_cast<double>(c1));
    return metric == DistanceMetric::Euclidean ? std::sqrt(dr * dr + dc * dc) : std::max(dr, dc);
}

namespace {

// Exact comparison for the Euclidean case: squared integer distance against d_max^2.
bool within(const LatticePoint& a, const LatticePoint& b, double d_max, DistanceMetric metric) {
    const std::int64_t dx = a.x - b.x, dy = a.y - b.y;
    if (metric == DistanceMetric::Chebyshev)
        return static_cast<double>(std::max(std::abs(dx), std::abs(dy))) <= d_max;
    const auto sq = static_cast<double>(dx * dx + dy * dy);
    return sq <= d_max * d_max;
}

std::vector<LatticePoint> lattice_of(std::span<const GraphNode> nodes) {
    std::vector<LatticePoint> pts;
    pts.reserve(nodes.size());
    for (const auto& n : nodes)
        pts.push_back({static_cast<std::int64_t>(n.row), static_cast<std::int64_t>(n.col)});
    return pts;
}

}  // namespace

std::vector<IndexEdge> filter_edges_by_distance(std::span<const IndexEdge> edges,
                                                std::span<const LatticePoint> points, double d_max,
                                                DistanceMetric metric) {
    std::vector<IndexEdge> kept;
    kept.reserve(edges.size());
    for (const auto& e : edges)
        if (within(points[e.u], points[e.v], d_max, metric)) kept.push_back(e);
    return kept;
}

std::vector<GraphNode> merge_cell_sets(const CellSet& source, const CellSet& target) {
    std::map<std::pair<std::size_t, std::size_t>, GraphNode> by_cell;
    for (const auto& c : source.cells) by_cell[{c.row, c.col}] = {0, c.row, c.col, NodeKind::Source, c.value, false};
    for (const auto& c : target.cells) by_cell[{c.row, c.col}] = {0, c.row, c.col, NodeKind::Target, c.value, false};
    std::vector<GraphNode> nodes;
    nodes.reserve(by_cell.size());
    for (auto& [rc, node] : by_cell) {
        node.id = nodes.size();
        nodes.push_back(node);
    }
    return nodes;
}

std::vector<IndexEdge> candidate_edges(std::span<const GraphNode> nodes, double d_max,
                                       DistanceMetric metric) {
    if (!(d_max > 0)) {
        throw Error(module::spatial_graph, ErrorCode::InvalidArgument, "d_max must be positive");
    }
    const auto pts = lattice_of(nodes);
    const auto tri = delaunay_triangulate(pts);
    return filter_edges_by_distance(tri.edges, pts, d_max, metric);
}

SpatialGraph assign_edge_weights(std::vector<GraphNode> nodes, std::span<const IndexEdge> candidates,
                                 const GraphParams& params) {
    std::vector<GraphEdge> edges;
    edges.reserve(candidates.size());
    for (const auto& c : candidates) {
        const auto& a = nodes[c.u];
        const auto& b = nodes[c.v];
        const NodeAttr aa{a.value, a.anomalous}, ba{b.value, b.anomalous};
        if (!node_passes(params, a.kind, aa) || !node_passes(params, b.kind, ba)) continue;
        const int w = positive_link(params, a.kind, aa, b.kind, ba) ? 1 : -1;
        edges.push_back({c.u, c.v, w, grid_distance(a.row, a.col, b.row, b.col, params.metric)});
    }
    return SpatialGraph(std::move(nodes), std::move(edges), params);
}

SpatialGraph assign_edge_weights_cmad(std::vector<GraphNode> nodes,
                                      std::span<const IndexEdge> candidates,
                                      const ChangeGrid& mask, std::size_t rows, std::size_t cols,
                                      GraphParams params) {
    if (mask.rows() != rows || mask.cols() != cols) {
        throw Error(module::spatial_graph, ErrorCode::MaskDimMismatch,
                    "anomaly mask is " + std::to_string(mask.rows()) + "x" + std::to_string(mask.cols()) +
                        ", grid is " + std::to_string(rows) + "x" + std::to_string(cols),
                    "resample the mask with resample_nearest to the analysis grid");
    }
    params.variant = WeightVariant::Cmad;
    for (auto& n : nodes) n.anomalous = mask.valid(n.row, n.col) && mask.value(n.row, n.col) != 0.0;
    std::vector<GraphEdge> edges;
    edges.reserve(candidates.size());
    for (const auto& c : candidates) {
        const auto& a = nodes[c.u];
        const auto& b = nodes[c.v];
        const int w = positive_link(params, a.kind, {a.value, a.anomalous}, b.kind, {b.value, b.anomalous}) ? 1 : -1;
        edges.push_back({c.u, c.v, w, grid_distance(a.row, a.col, b.row, b.col, params.metric)});
    }
    return SpatialGraph(std::move(nodes), std::move(edges), params);
}

namespace {
void require_both_sides(const CellSet& source, const CellSet& target) {
    if (source.cells.empty() || target.cells.empty()) {
        throw Error(module::spatial_graph, ErrorCode::EmptySide,
                    std::string("no ") + (source.cells.empty() ? "source" : "target") +
                        " cells qualify for the requested band",
                    "choose a lower band or widen the window");
    }
}
}  // namespace

SpatialGraph build_graph(const CellSet& source, const CellSet& target, const GraphParams& params) {
    require_both_sides(source, target);
    auto nodes = merge_cell_sets(source, target);
    const auto cands = candidate_edges(nodes, params.d_max, params.metric);
    return assign_edge_weights(std::move(nodes), cands, params);
}

SpatialGraph build_graph_cmad(const CellSet& source, const CellSet& target,
                              const ChangeGrid& anomaly_mask, std::size_t rows, std::size_t cols,
                              GraphParams params) {
    require_both_sides(source, target);
    if (anomaly_mask.rows() != rows || anomaly_mask.cols() != cols) {
        throw Error(module::spatial_graph, ErrorCode::MaskDimMismatch,
                    "anomaly mask is " + std::to_string(anomaly_mask.rows()) + "x" +
                        std::to_string(anomaly_mask.cols()) + ", grid is " + std::to_string(rows) +
                        "x" + std::to_string(cols),
                    "resample the mask with resample_nearest to the analysis grid");
    }
    auto nodes = merge_cell_sets(source, target);
    const auto cands = candidate_edges(nodes, params.d_max, params.metric);
    return assign_edge_weights_cmad(std::move(nodes), cands, anomaly_mask, rows, cols, std::move(params));
}

}  // namespace spatial_link
