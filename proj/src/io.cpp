#include "spatial_link/io.hpp"

#include "spatial_link/error.hpp"

#include <fstream>
#include <sstream>

namespace spatial_link {

namespace {

[[noreturn]] void fail(ErrorCode code, const std::string& msg, std::string hint = {}) {
    throw Error(module::io_cli, code, msg, std::move(hint));
}

json filter_to_json(const BandFilter& f) {
    return {{"band", to_string(f.band)},
            {"orientation", to_string(f.orientation)},
            {"selection", to_string(f.selection)},
            {"bands", bands_to_json(f.bands)}};
}

BandFilter filter_from_json(const json& j) {
    BandFilter f;
    f.band = parse_band(j.at("band").get<std::string>());
    f.orientation = parse_orientation(j.at("orientation").get<std::string>());
    f.selection = parse_selection(j.at("selection").get<std::string>());
    f.bands = bands_from_json(j.at("bands"));
    return f;
}

json cell_json(const GraphNode& n) { return json::array({n.row, n.col}); }

}  // namespace

json bands_to_json(const ThresholdBands& b) {
    return {{"median", b.median}, {"q3", b.q3}, {"ub", b.ub}, {"q1", b.q1}, {"count", b.count}};
}

ThresholdBands bands_from_json(const json& j) {
    ThresholdBands b;
    b.median = j.at("median").get<double>();
    b.q3 = j.at("q3").get<double>();
    b.ub = j.at("ub").get<double>();
    b.q1 = j.value("q1", 0.0);
    b.count = j.value("count", std::size_t{0});
    return b;
}

json graph_to_json(const SpatialGraph& g) {
    json nodes = json::array();
    for (const auto& n : g.nodes()) {
        json node = {{"id", n.id}, {"row", n.row}, {"col", n.col}, {"kind", to_string(n.kind)}, {"value", n.value}};
        if (g.params().variant == WeightVariant::Cmad) node["anomalous"] = n.anomalous;
        nodes.push_back(std::move(node));
    }
    json edges = json::array();
    for (const auto& e : g.edges())
        edges.push_back({{"u", e.u}, {"v", e.v}, {"weight", e.weight}, {"distance", e.distance}});
    const auto& p = g.params();
    json params = {{"d_max", p.d_max},
                   {"metric", to_string(p.metric)},
                   {"variant", to_string(p.variant)},
                   {"source_filter", filter_to_json(p.source_filter)},
                   {"target_filter", filter_to_json(p.target_filter)}};
    if (p.variant == WeightVariant::Aar) params["elevation_threshold"] = p.elevation_threshold;
    return {{"nodes", nodes}, {"edges", edges}, {"params", params}};
}

SpatialGraph graph_from_json(const json& j) {
    try {
        GraphParams p;
        const auto& jp = j.at("params");
        p.d_max = jp.at("d_max").get<double>();
        p.metric = parse_metric(jp.value("metric", std::string("euclidean")));
        p.variant = parse_variant(jp.value("variant", std::string("standard")));
        if (jp.contains("source_filter")) p.source_filter = filter_from_json(jp["source_filter"]);
        if (jp.contains("target_filter")) p.target_filter = filter_from_json(jp["target_filter"]);
        p.elevation_threshold = jp.value("elevation_threshold", 0.0);

        std::vector<GraphNode> nodes;
        for (const auto& n : j.at("nodes")) {
            nodes.push_back({n.at("id").get<std::size_t>(), n.at("row").get<std::size_t>(),
                             n.at("col").get<std::size_t>(), parse_kind(n.at("kind").get<std::string>()),
                             n.at("value").get<double>(), n.value("anomalous", false)});
        }
        std::vector<GraphEdge> edges;
        for (const auto& e : j.at("edges")) {
            edges.push_back({e.at("u").get<std::size_t>(), e.at("v").get<std::size_t>(), e.at("weight").get<int>(),
                             e.value("distance", 0.0)});
        }
        return SpatialGraph(std::move(nodes), std::move(edges), std::move(p));
    } catch (const json::exception& e) {
        fail(ErrorCode::MalformedHeader, std::string("graph document: ") + e.what(),
             "regenerate it with spatial-link build-graph");
    }
}

json paths_to_json(const SpatialGraph& g, std::span<const LinkagePath> paths) {
    json out = json::array();
    for (const auto& p : paths) {
        json cells = json::array();
        for (auto id : p.nodes) cells.push_back(cell_json(g.nodes()[id]));
        out.push_back({{"nodes", p.nodes}, {"cells", cells}, {"edge_weights", p.edge_weights}, {"score", p.score}});
    }
    return out;
}

std::vector<LinkagePath> paths_from_json(const SpatialGraph& g, const json& j) {
    std::vector<LinkagePath> paths;
    try {
        const auto& arr = j.is_object() ? j.at("paths") : j;
        for (const auto& p : arr) {
            auto nodes = p.at("nodes").get<std::vector<std::size_t>>();
            for (auto id : nodes) {
                if (id >= g.node_count()) fail(ErrorCode::InvalidArgument, "path references a node not in the graph");
            }
            paths.push_back(make_path(g, std::move(nodes)));
        }
    } catch (const json::exception& e) {
        fail(ErrorCode::MalformedHeader, std::string("paths document: ") + e.what(),
             "regenerate it with spatial-link extract-paths");
    }
    return paths;
}

json results_to_json(std::span<const SignificanceResult> results) {
    json out = json::array();
    for (const auto& r : results) {
        out.push_back({{"path_index", r.path_index},
                       {"observed", r.observed},
                       {"p_value", r.p_value},
                       {"significant", r.significant},
                       {"null_mean", r.null_mean}});
    }
    return out;
}

json export_geojson(const SpatialGraph& g, std::span<const LinkagePath> paths, std::span<const double> p_values,
                    const GridRegistration& reg) {
    if (!p_values.empty() && p_values.size() != paths.size()) {
        fail(ErrorCode::InvalidArgument, "one p-value per exported path is required");
    }
    json features = json::array();
    for (std::size_t i = 0; i < paths.size(); ++i) {
        const auto& p = paths[i];
        json coords = json::array();
        for (auto id : p.nodes) {
            const auto& n = g.nodes()[id];
            coords.push_back({reg.longitude(static_cast<double>(n.col)), reg.latitude(static_cast<double>(n.row))});
        }
        json props = {{"score", p.score},
                      {"p_value", p_values.empty() ? json(nullptr) : json(p_values[i])},
                      {"source_cell", cell_json(g.nodes()[p.nodes.front()])},
                      {"target_cell", cell_json(g.nodes()[p.nodes.back()])}};
        features.push_back({{"type", "Feature"},
                            {"geometry", {{"type", "LineString"}, {"coordinates", coords}}},
                            {"properties", props}});
    }
    return {{"type", "FeatureCollection"}, {"features", features}};
}

std::string frequency_csv(const LinkageFrequencyRaster& raster) {
    std::ostringstream os;
    os << "row,col,count\n";
    for (std::size_t r = 0; r < raster.rows; ++r)
        for (std::size_t c = 0; c < raster.cols; ++c)
            if (const auto v = raster.at(r, c)) os << r << ',' << c << ',' << v << '\n';
    return os.str();
}

json aar_report_to_json(const AarGraph& g, std::span<const AarComponent> components, const StationReport& station) {
    json comps = json::array();
    for (const auto& c : components)
        comps.push_back({{"size", c.nodes.size()}, {"extent_km", c.extent_km}, {"retained", c.retained}});
    json paths = json::array();
    for (std::size_t i = 0; i < station.paths.size(); ++i) {
        const auto& p = station.paths[i];
        json cells = json::array();
        for (auto id : p.nodes) cells.push_back(cell_json(g.graph.nodes()[id]));
        const auto& r = station.results[i];
        paths.push_back({{"nodes", p.nodes},
                         {"cells", cells},
                         {"observed", r.observed},
                         {"p_value", r.p_value},
                         {"significant", r.significant}});
    }
    const auto& s = g.points[station.station_node];
    return {{"nodes", g.graph.node_count()},
            {"edges", g.graph.edges().size()},
            {"elevation_threshold", g.graph.params().elevation_threshold},
            {"components", comps},
            {"station", {{"node", station.station_node}, {"cell", {s.row, s.col}}, {"lat", s.lat}, {"lon", s.lon}}},
            {"origins", station.origins},
            {"paths", paths}};
}

json make_metadata(const json& config_echo, std::uint64_t seed, const std::string& null_model) {
    return {{"tool", kToolName}, {"version", kToolVersion}, {"config", config_echo}, {"seed", seed},
            {"null_model", null_model}};
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorCode::IoError, "cannot write " + path.string(), "check the output directory");
    out << text;
}

void write_json(const std::filesystem::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

json read_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::IoError, "cannot open " + path.string(), "check the input path");
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        fail(ErrorCode::MalformedHeader, "invalid JSON in " + path.string() + ": " + e.what());
    }
}

}  // namespace spatial_link
