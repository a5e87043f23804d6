#pragma once

#include "spatial_link/aar.hpp"
#include "spatial_link/graph.hpp"
#include "spatial_link/paths.hpp"
#include "spatial_link/significance.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <optional>
#include <span>
#include <string>

namespace spatial_link {

inline constexpr const char* kToolName = "spatial-link";
inline constexpr const char* kToolVersion = "0.3.0";

using nlohmann::json;

json bands_to_json(const ThresholdBands& b);
ThresholdBands bands_from_json(const json& j);

json graph_to_json(const SpatialGraph& g);
SpatialGraph graph_from_json(const json& j);

// [{nodes, cells, edge_weights, score}]
json paths_to_json(const SpatialGraph& g, std::span<const LinkagePath> paths);
// Re-derives weights and scores from the graph; throws when a path is not a
// walk of the graph.
std::vector<LinkagePath> paths_from_json(const SpatialGraph& g, const json& j);

// [{path_index, observed, p_value, significant}]
json results_to_json(std::span<const SignificanceResult> results);

// One LineString feature per path, coordinates (lon, lat) from source to target.
// `p_values` is either empty or parallel to `paths`.
json export_geojson(const SpatialGraph& g, std::span<const LinkagePath> paths,
                    std::span<const double> p_values, const GridRegistration& reg);

// "row,col,count" lines for the non-zero cells.
std::string frequency_csv(const LinkageFrequencyRaster& raster);

json aar_report_to_json(const AarGraph& g, std::span<const AarComponent> components,
                        const StationReport& station);

json make_metadata(const json& config_echo, std::uint64_t seed, const std::string& null_model);

void write_text(const std::filesystem::path& path, const std::string& text);
void write_json(const std::filesystem::path& path, const json& j);
json read_json(const std::filesystem::path& path);

}  // namespace spatial_link
