#pragma once

#include "spatial_link/graph.hpp"
#include "spatial_link/paths.hpp"
#include "spatial_link/significance.hpp"

#include <optional>
#include <span>
#include <vector>

namespace spatial_link {

inline constexpr double kKmPerDegree = 111.11;

struct GeoPoint {
    double lat = 0.0;
    double lon = 0.0;
    std::size_t row = 0;
    std::size_t col = 0;
    double value = 0.0;
};

// Longitude difference folded into [-180, 180).
double wrap_longitude(double dlon) noexcept;

// 111.11 * sqrt(dlat^2 + (dlon * cos(mean lat))^2) kilometres.
double equirect_distance(const GeoPoint& a, const GeoPoint& b) noexcept;

// Elevated cells (valid, non-zero in `mask`) with coordinates from the mask's
// registration and values read from `values`.
std::vector<GeoPoint> elevated_points(const ChangeGrid& mask, const ChangeGrid& values);

struct AarGraph {
    SpatialGraph graph;           // Neutral nodes, sorted by (row, col); distances in km
    std::vector<GeoPoint> points;  // points[id] belongs to node id
};

// Delaunay over the cell indices of `points`, then drops edges longer than
// max_edge_km. A link is positive when both endpoint values reach
// `elevation_threshold` (defaults to the smallest point value).
AarGraph build_aar_graph(std::vector<GeoPoint> points, double max_edge_km = 250.0,
                         std::optional<double> elevation_threshold = std::nullopt);

struct AarComponent {
    std::vector<std::size_t> nodes;  // ascending
    double extent_km = 0.0;
    bool retained = false;
};

// Diameter of a node set under equirect_distance; 0 for a singleton.
double component_extent(std::span<const std::size_t> nodes, std::span<const GeoPoint> points);

// Components ordered by their smallest node id; retained iff extent > min_extent_km.
std::vector<AarComponent> connected_components(const AarGraph& g, double min_extent_km = 2000.0);

// Nearest node to (lat, lon) within radius_km; ties go to the lower id.
// Throws StationUnreachable.
std::size_t snap_to_node(const AarGraph& g, double lat, double lon, double radius_km = 150.0);

struct StationOptions {
    std::size_t max_nodes = 11;
    double snap_km = 150.0;
    double min_extent_km = 2000.0;
    std::size_t cap = kDefaultPathCap;
    SignificanceOptions significance{.alpha = 0.005};
};

struct StationReport {
    std::size_t station_node = 0;
    std::vector<std::size_t> origins;  // origins that share the station's retained component
    std::vector<LinkagePath> paths;
    std::vector<SignificanceResult> results;
};

// Origin -> station paths restricted to retained components, tested against a
// permutation of `values` over the whole grid.
StationReport station_path_significance(const AarGraph& g, std::span<const std::size_t> origins,
                                        double station_lat, double station_lon, const ChangeGrid& values,
                                        const StationOptions& options);

}  // namespace spatial_link
