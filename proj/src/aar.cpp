#include "spatial_link/aar.hpp"

#include "spatial_link/delaunay.hpp"
#include "spatial_link/error.hpp"
#include "spatial_link/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace spatial_link {

double wrap_longitude(double dlon) noexcept {
    double w = std::fmod(dlon + 180.0, 360.0);
    if (w < 0) w += 360.0;
    return w - 180.0;
}

double equirect_distance(const GeoPoint& a, const GeoPoint& b) noexcept {
    constexpr double rad = std::numbers::pi / 180.0;
    const double dlat = b.lat - a.lat;
    const double dlon = wrap_longitude(b.lon - a.lon) * std::cos(0.5 * (a.lat + b.lat) * rad);
    return kKmPerDegree * std::sqrt(dlat * dlat + dlon * dlon);
}

std::vector<GeoPoint> elevated_points(const ChangeGrid& mask, const ChangeGrid& values) {
    if (!mask.same_shape(values)) {
        throw Error(module::aar_benchmark, ErrorCode::MaskDimMismatch,
                    "elevated mask and value grid differ in shape",
                    "resample both onto the same grid before running aar");
    }
    const auto& reg = mask.registration();
    std::vector<GeoPoint> pts;
    for (std::size_t r = 0; r < mask.rows(); ++r) {
        for (std::size_t c = 0; c < mask.cols(); ++c) {
            if (!mask.valid(r, c) || mask.value(r, c) == 0.0 || !values.valid(r, c)) continue;
            pts.push_back({reg.latitude(static_cast<double>(r)),
                           wrap_longitude(reg.longitude(static_cast<double>(c))), r, c, values.value(r, c)});
        }
    }
    return pts;
}

AarGraph build_aar_graph(std::vector<GeoPoint> points, double max_edge_km,
                         std::optional<double> elevation_threshold) {
    if (points.size() < 2) {
        throw Error(module::aar_benchmark, ErrorCode::InsufficientData,
                    "need at least two elevated points", "check the elevated mask");
    }
    if (!(max_edge_km > 0)) {
        throw Error(module::aar_benchmark, ErrorCode::InvalidArgument, "max_edge_km must be positive");
    }
    std::sort(points.begin(), points.end(),
              [](const GeoPoint& a, const GeoPoint& b) { return std::tie(a.row, a.col) < std::tie(b.row, b.col); });

    GraphParams params;
    params.variant = WeightVariant::Aar;
    params.d_max = max_edge_km;
    params.elevation_threshold = elevation_threshold.value_or(
        std::min_element(points.begin(), points.end(),
                         [](const GeoPoint& a, const GeoPoint& b) { return a.value < b.value; })
            ->value);

    std::vector<LatticePoint> lattice;
    std::vector<GraphNode> nodes;
    lattice.reserve(points.size());
    nodes.reserve(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        const auto& p = points[i];
        lattice.push_back({static_cast<std::int64_t>(p.row), static_cast<std::int64_t>(p.col)});
        nodes.push_back({i, p.row, p.col, NodeKind::Neutral, p.value, false});
    }
    const auto tri = delaunay_triangulate(lattice);

    std::vector<GraphEdge> edges;
    for (const auto& e : tri.edges) {
        const double km = equirect_distance(points[e.u], points[e.v]);
        if (km > max_edge_km) continue;
        const bool plus = positive_link(params, NodeKind::Neutral, {points[e.u].value, false}, NodeKind::Neutral,
                                        {points[e.v].value, false});
        edges.push_back({e.u, e.v, plus ? 1 : -1, km});
    }
    return {SpatialGraph(std::move(nodes), std::move(edges), params), std::move(points)};
}

double component_extent(std::span<const std::size_t> nodes, std::span<const GeoPoint> points) {
    double best = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i)
        for (std::size_t j = i + 1; j < nodes.size(); ++j)
            best = std::max(best, equirect_distance(points[nodes[i]], points[nodes[j]]));
    return best;
}

std::vector<AarComponent> connected_components(const AarGraph& g, double min_extent_km) {
    const auto n = g.graph.node_count();
    std::vector<std::size_t> label(n, SpatialGraph::npos);
    std::vector<AarComponent> comps;
    for (std::size_t start = 0; start < n; ++start) {
        if (label[start] != SpatialGraph::npos) continue;
        AarComponent comp;
        std::vector<std::size_t> stack{start};
        label[start] = comps.size();
        while (!stack.empty()) {
            const auto u = stack.back();
            stack.pop_back();
            comp.nodes.push_back(u);
            for (const auto& nb : g.graph.neighbors(u)) {
                if (label[nb.node] != SpatialGraph::npos) continue;
                label[nb.node] = comps.size();
                stack.push_back(nb.node);
            }
        }
        std::sort(comp.nodes.begin(), comp.nodes.end());
        comp.extent_km = component_extent(comp.nodes, g.points);
        comp.retained = comp.extent_km > min_extent_km;
        comps.push_back(std::move(comp));
    }
    return comps;
}

std::size_t snap_to_node(const AarGraph& g, double lat, double lon, double radius_km) {
    const GeoPoint station{lat, lon};
    std::size_t best = SpatialGraph::npos;
    double best_km = radius_km;
    for (std::size_t i = 0; i < g.points.size(); ++i) {
        const double km = equirect_distance(station, g.points[i]);
        if (km < best_km || (km == best_km && best == SpatialGraph::npos)) {
            best = i;
            best_km = km;
        }
    }
    if (best == SpatialGraph::npos) {
        throw Error(module::aar_benchmark, ErrorCode::StationUnreachable,
                    "no elevated node within " + std::to_string(radius_km) + " km of the station",
                    "raise --snap-km or check the station coordinates");
    }
    return best;
}

StationReport station_path_significance(const AarGraph& g, std::span<const std::size_t> origins,
                                        double station_lat, double station_lon, const ChangeGrid& values,
                                        const StationOptions& opt) {
    if (origins.empty()) {
        throw Error(module::aar_benchmark, ErrorCode::InvalidArgument, "no origin nodes given",
                    "pass --origins with at least one cell or point");
    }
    StationReport report;
    report.station_node = snap_to_node(g, station_lat, station_lon, opt.snap_km);

    const auto comps = connected_components(g, opt.min_extent_km);
    std::vector<std::size_t> comp_of(g.graph.node_count());
    for (std::size_t k = 0; k < comps.size(); ++k)
        for (auto id : comps[k].nodes) comp_of[id] = k;
    const auto& home = comps[comp_of[report.station_node]];

    for (auto o : origins) {
        if (o >= g.graph.node_count()) {
            throw Error(module::aar_benchmark, ErrorCode::InvalidArgument, "origin node out of range");
        }
        if (home.retained && o != report.station_node && comp_of[o] == comp_of[report.station_node])
            report.origins.push_back(o);
    }
    std::sort(report.origins.begin(), report.origins.end());
    report.origins.erase(std::unique(report.origins.begin(), report.origins.end()), report.origins.end());
    if (report.origins.empty()) return report;

    std::vector<bool> is_target(g.graph.node_count(), false);
    is_target[report.station_node] = true;
    report.paths = extract_paths(g.graph, report.origins, is_target, opt.max_nodes, opt.cap,
                                 resolve_threads(opt.significance.threads));

    NullContext ctx;
    ctx.graph = &g.graph;
    ctx.scope = NullScope::Window;
    ctx.source = &values;
    report.results = test_paths(ctx, report.paths, opt.significance);
    return report;
}

}  // namespace spatial_link
