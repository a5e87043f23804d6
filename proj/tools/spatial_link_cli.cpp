#include "spatial_link/aar.hpp"
#include "spatial_link/error.hpp"
#include "spatial_link/io.hpp"
#include "spatial_link/parallel.hpp"
#include "spatial_link/pipeline.hpp"
#include "spatial_link/synthetic.hpp"

#include <CLI11.hpp>

#include <cstring>
#include <iostream>

namespace sl = spatial_link;
namespace fs = std::filesystem;

namespace {

// String mirrors of the enum-valued config fields, so CLI11 can bind them.
struct EnumFlags {
    std::string orientation_source, orientation_target, band_source, band_target, selection, metric, variant,
        null_scope, window;

    explicit EnumFlags(const sl::RunConfig& c)
        : orientation_source(sl::to_string(c.source_orientation)),
          orientation_target(sl::to_string(c.target_orientation)),
          band_source(sl::to_string(c.band_source)),
          band_target(sl::to_string(c.band_target)),
          selection(sl::to_string(c.selection)),
          metric(sl::to_string(c.metric)),
          variant(sl::to_string(c.variant)),
          null_scope(sl::to_string(c.null_scope)),
          window(c.window ? c.window->to_string() : "") {}

    void apply(sl::RunConfig& c) const {
        c.source_orientation = sl::parse_orientation(orientation_source);
        c.target_orientation = sl::parse_orientation(orientation_target);
        c.band_source = sl::parse_band(band_source);
        c.band_target = sl::parse_band(band_target);
        c.selection = sl::parse_selection(selection);
        c.metric = sl::parse_metric(metric);
        c.variant = sl::parse_variant(variant);
        c.null_scope = sl::parse_null_scope(null_scope);
        if (window.empty()) c.window.reset();
        else c.window = sl::RegionWindow::parse(window);
    }
};

void add_input_flags(CLI::App* sub, sl::RunConfig& cfg) {
    sub->add_option("--source", cfg.source_path, "source change grid (.json sidecar, .raw or .csv)");
    sub->add_option("--target", cfg.target_path, "target change grid");
    sub->add_option("--format", cfg.format, "grid format: raw+json, csv or auto");
}

void add_graph_flags(CLI::App* sub, sl::RunConfig& cfg, EnumFlags& e) {
    sub->add_option("--mask", cfg.mask_path, "binary anomaly mask for the cmad variant");
    sub->add_option("--orientation-source", e.orientation_source, "loss-negative or loss-positive");
    sub->add_option("--orientation-target", e.orientation_target, "loss-negative or loss-positive");
    sub->add_option("--window", e.window, "analysis window r0:r1,c0:c1 (inclusive)");
    sub->add_flag("--global-bands", cfg.global_bands, "take band quantiles over the whole grid");
    sub->add_option("--ub-multiplier", cfg.ub_multiplier, "IQR multiplier of the upper fence");
    sub->add_option("--band-source", e.band_source, "moderate, high or anomalous");
    sub->add_option("--band-target", e.band_target, "moderate, high or anomalous");
    sub->add_option("--selection", e.selection, "two-sided or loss-only node selection");
    sub->add_option("--dmax", cfg.d_max, "edge length cutoff in cells");
    sub->add_option("--metric", e.metric, "euclidean or chebyshev");
    sub->add_option("--variant", e.variant, "standard or cmad");
}

void add_path_flags(CLI::App* sub, sl::RunConfig& cfg) {
    sub->add_option("--max-len", cfg.max_len, "maximum path length in nodes");
    sub->add_option("--cap", cfg.cap, "path enumeration cap");
}

void add_significance_flags(CLI::App* sub, sl::RunConfig& cfg, EnumFlags& e) {
    sub->add_option("--m", cfg.replicates, "Monte Carlo replicates");
    sub->add_option("--alpha", cfg.alpha, "significance level");
    sub->add_option("--null-scope", e.null_scope, "nodes or window");
    sub->add_flag("--shared-null", cfg.shared_null, "one null per node-kind sequence");
    sub->add_flag("--bh", cfg.benjamini_hochberg, "Benjamini-Hochberg adjustment");
}

std::optional<sl::ChangeGrid> load_optional(const std::string& path, const std::string& format) {
    if (path.empty()) return std::nullopt;
    return sl::load_grid(path, sl::parse_grid_format(format));
}

void emit(const sl::json& j, const std::string& out) {
    if (out.empty() || out == "-") std::cout << j.dump(2) << '\n';
    else sl::write_json(out, j);
}

sl::SignificanceOptions significance_options(const sl::RunConfig& cfg) {
    sl::SignificanceOptions o;
    o.replicates = cfg.replicates;
    o.seeds.base_seed = cfg.seed;
    o.alpha = cfg.alpha;
    o.threads = sl::resolve_threads(cfg.threads);
    o.shared_null = cfg.shared_null;
    o.benjamini_hochberg = cfg.benjamini_hochberg;
    return o;
}

std::pair<double, double> parse_latlon(const std::string& s) {
    const auto comma = s.find(',');
    try {
        if (comma == std::string::npos) throw std::invalid_argument(s);
        return {std::stod(s.substr(0, comma)), std::stod(s.substr(comma + 1))};
    } catch (const std::exception&) {
        throw sl::Error(sl::module::io_cli, sl::ErrorCode::InvalidArgument, "cannot parse station '" + s + "'",
                        "use --station LAT,LON");
    }
}

// {"cells": [[r, c], ...]} and/or {"points": [[lat, lon], ...]}; a bare array is read as cells.
std::vector<std::size_t> load_origins(const std::string& path, const sl::AarGraph& g, double snap_km) {
    const auto doc = sl::read_json(path);
    std::vector<std::size_t> ids;
    const auto& cells = doc.is_array() ? doc : doc.value("cells", sl::json::array());
    for (const auto& rc : cells) {
        const auto id = g.graph.node_at(rc.at(0).get<std::size_t>(), rc.at(1).get<std::size_t>());
        if (id == sl::SpatialGraph::npos) {
            throw sl::Error(sl::module::aar_benchmark, sl::ErrorCode::InvalidArgument,
                            "origin cell " + rc.dump() + " is not an elevated point", "check the origins file");
        }
        ids.push_back(id);
    }
    if (doc.is_object() && doc.contains("points"))
        for (const auto& p : doc["points"]) ids.push_back(sl::snap_to_node(g, p.at(0), p.at(1), snap_km));
    return ids;
}

std::string config_path_from_argv(int argc, char** argv) {
    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--config") == 0 && i + 1 < argc) return argv[i + 1];
        if (std::strncmp(argv[i], "--config=", 9) == 0) return argv[i] + 9;
    }
    return {};
}

int run(int argc, char** argv) {
    sl::RunConfig cfg;
    const auto config_path = config_path_from_argv(argc, argv);
    if (!config_path.empty()) cfg = sl::RunConfig::from_json(sl::read_json(config_path), cfg);
    EnumFlags e(cfg);

    CLI::App app{"Significant spatial linkage paths between two gridded change fields"};
    app.require_subcommand(1);
    app.fallthrough();
    std::string ignored_config;
    app.add_option("--config", ignored_config, "JSON run config; flags override it");
    app.add_option("--seed", cfg.seed, "base seed of the Monte Carlo replicates");
    app.add_option("--threads", cfg.threads, "worker threads (default: SPATIAL_LINK_THREADS, then all cores)");
    std::string out;

    // thresholds
    auto* th = app.add_subcommand("thresholds", "print the threshold bands of one grid");
    std::string grid_path, orientation = "loss-negative";
    th->add_option("--grid", grid_path, "change grid")->required();
    th->add_option("--orientation", orientation, "loss-negative or loss-positive");
    th->add_option("--window", e.window, "window r0:r1,c0:c1");
    th->add_option("--format", cfg.format, "grid format");
    th->add_flag("--global-bands", cfg.global_bands, "ignore the window for the quantiles");
    th->add_option("--ub-multiplier", cfg.ub_multiplier, "IQR multiplier of the upper fence");

    // diff
    auto* df = app.add_subcommand("diff", "write B - A");
    std::string diff_a, diff_b;
    df->add_option("a", diff_a, "earlier grid")->required();
    df->add_option("b", diff_b, "later grid")->required();
    df->add_option("-o,--out", out, "output grid")->required();
    df->add_option("--format", cfg.format, "grid format");

    // build-graph
    auto* bg = app.add_subcommand("build-graph", "build the weighted proximity graph");
    add_input_flags(bg, cfg);
    add_graph_flags(bg, cfg, e);
    bg->add_option("-o,--out", out, "graph.json (stdout when omitted)");

    // extract-paths
    auto* ep = app.add_subcommand("extract-paths", "enumerate source-to-target paths");
    std::string graph_path, paths_path;
    ep->add_option("--graph", graph_path, "graph.json")->required();
    add_path_flags(ep, cfg);
    ep->add_option("-o,--out", out, "paths.json (stdout when omitted)");

    // significance
    auto* sg = app.add_subcommand("significance", "Monte Carlo test of extracted paths");
    sg->add_option("--graph", graph_path, "graph.json")->required();
    sg->add_option("--paths", paths_path, "paths.json")->required();
    add_input_flags(sg, cfg);
    sg->add_option("--mask", cfg.mask_path, "anomaly mask (cmad graphs, window null)");
    sg->add_option("--window", e.window, "window of the window-scope null");
    add_significance_flags(sg, cfg, e);
    sg->add_option("-o,--out", out, "results.json (stdout when omitted)");

    // pipeline
    auto* pl = app.add_subcommand("pipeline", "bands, graph, paths and significance in one run");
    add_input_flags(pl, cfg);
    add_graph_flags(pl, cfg, e);
    add_path_flags(pl, cfg);
    add_significance_flags(pl, cfg, e);
    pl->add_flag("--sweep-bands", cfg.sweep_bands, "run all nine source/target band pairs");
    pl->add_option("--out-dir", cfg.out_dir, "output directory");

    // synth
    auto* sy = app.add_subcommand("synth", "generate synthetic grids with a planted chain");
    std::string spec_path, synth_dir = "synth";
    bool null_only = false;
    sy->add_option("--spec", spec_path, "plant spec JSON (defaults when omitted)");
    sy->add_option("--out-dir", synth_dir, "output directory");
    sy->add_flag("--null", null_only, "noise only, no planted chain");

    // aar
    auto* aa = app.add_subcommand("aar", "aerosol corridor benchmark");
    std::string mask_path, values_path, origins_path, station;
    double min_extent_km = 2000.0, max_edge_km = 250.0, snap_km = 150.0, aar_alpha = 0.005;
    std::optional<double> elevation;
    aa->add_option("--mask", mask_path, "elevated-point mask grid")->required();
    aa->add_option("--values", values_path, "aerosol value grid")->required();
    aa->add_option("--origins", origins_path, "origins JSON: {cells: [[r,c]]} or {points: [[lat,lon]]}");
    aa->add_option("--station", station, "station LAT,LON");
    aa->add_option("--min-extent-km", min_extent_km, "component extent a corridor must exceed");
    aa->add_option("--max-edge-km", max_edge_km, "longest Delaunay edge kept");
    aa->add_option("--snap-km", snap_km, "station and origin snap radius");
    aa->add_option("--elevation-threshold", elevation, "value both endpoints must reach for a positive link");
    aa->add_option("--alpha", aar_alpha, "significance level");
    aa->add_option("--m", cfg.replicates, "Monte Carlo replicates");
    aa->add_option("--max-len", cfg.max_len, "maximum path length in nodes");
    aa->add_option("--cap", cfg.cap, "path enumeration cap");
    aa->add_option("--format", cfg.format, "grid format");
    aa->add_option("-o,--out", out, "report JSON (stdout when omitted)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& err) {
        return app.exit(err);
    }
    e.apply(cfg);
    const auto fmt = sl::parse_grid_format(cfg.format);

    if (*th) {
        const auto grid = sl::load_grid(grid_path, fmt);
        const auto o = sl::parse_orientation(orientation);
        const auto bands = (cfg.window && !cfg.global_bands)
                               ? sl::compute_threshold_bands(grid, *cfg.window, o, cfg.ub_multiplier)
                               : sl::compute_threshold_bands(grid, o, cfg.ub_multiplier);
        std::cout << sl::bands_to_json(bands).dump(2) << '\n';
    } else if (*df) {
        const auto a = sl::load_grid(diff_a, fmt);
        const auto b = sl::load_grid(diff_b, fmt);
        sl::save_grid(sl::diff_grids(a, b), out, fmt);
    } else if (*bg) {
        cfg.validate();
        const auto source = sl::load_grid(cfg.source_path, fmt);
        const auto target = sl::load_grid(cfg.target_path, fmt);
        const auto mask = load_optional(cfg.mask_path, cfg.format);
        const auto stage = sl::build_stage(cfg, source, target, mask ? &*mask : nullptr);
        if (!stage.note.empty()) std::cerr << stage.note << '\n';
        auto doc = sl::graph_to_json(stage.graph);
        doc["bands"] = {{"source", sl::bands_to_json(stage.source_bands)}, {"target", sl::bands_to_json(stage.target_bands)}};
        doc["metadata"] = sl::make_metadata(cfg.to_json(), cfg.seed, sl::null_model_name(cfg.null_scope));
        emit(doc, out);
    } else if (*ep) {
        const auto graph = sl::graph_from_json(sl::read_json(graph_path));
        const auto paths = sl::extract_all_paths(graph, cfg.max_len, cfg.cap, sl::resolve_threads(cfg.threads));
        emit(sl::paths_to_json(graph, paths), out);
    } else if (*sg) {
        const auto graph = sl::graph_from_json(sl::read_json(graph_path));
        const auto paths = sl::paths_from_json(graph, sl::read_json(paths_path));
        const auto source = load_optional(cfg.source_path, cfg.format);
        const auto target = load_optional(cfg.target_path, cfg.format);
        const auto mask = load_optional(cfg.mask_path, cfg.format);
        sl::NullContext ctx;
        ctx.graph = &graph;
        ctx.scope = cfg.null_scope;
        ctx.source = source ? &*source : nullptr;
        ctx.target = target ? &*target : nullptr;
        ctx.anomaly_mask = mask ? &*mask : nullptr;
        ctx.window = cfg.window;
        const auto results = sl::test_paths(ctx, paths, significance_options(cfg));
        emit({{"metadata", sl::make_metadata(cfg.to_json(), cfg.seed, sl::null_model_name(cfg.null_scope))},
              {"results", sl::results_to_json(results)}},
             out);
    } else if (*pl) {
        const auto summaries = sl::run_pipeline(cfg);
        for (const auto& s : summaries) {
            std::cout << (s.label.empty() ? "run" : s.label) << ": nodes=" << s.nodes << " edges=" << s.edges
                      << " paths=" << s.paths << " significant=" << s.significant;
            if (!s.note.empty()) std::cout << " (" << s.note << ")";
            std::cout << '\n';
        }
    } else if (*sy) {
        sl::PlantSpec spec = spec_path.empty() ? sl::default_plant(cfg.seed)
                                               : sl::PlantSpec::from_json(sl::read_json(spec_path));
        const fs::path dir = synth_dir;
        fs::create_directories(dir);
        if (null_only) {
            const auto f = sl::generate_null(spec.dims, spec.noise, spec.seed, spec.shelf_rows);
            sl::save_grid(f.source, dir / "source.json");
            sl::save_grid(f.target, dir / "target.json");
        } else {
            const auto inst = sl::generate(spec);
            sl::save_grid(inst.source, dir / "source.json");
            sl::save_grid(inst.target, dir / "target.json");
            sl::json cells = sl::json::array();
            for (const auto& [r, c] : inst.oracle) cells.push_back({r, c});
            sl::write_json(dir / "oracle.json", {{"cells", cells}, {"split", spec.split}});
        }
        sl::write_json(dir / "spec.json", spec.to_json());
    } else if (*aa) {
        const auto mask = sl::load_grid(mask_path, fmt);
        const auto values = sl::load_grid(values_path, fmt);
        const auto g = sl::build_aar_graph(sl::elevated_points(mask, values), max_edge_km, elevation);
        const auto comps = sl::connected_components(g, min_extent_km);
        sl::StationReport report;
        sl::json doc;
        if (!station.empty() && !origins_path.empty()) {
            const auto [lat, lon] = parse_latlon(station);
            sl::StationOptions opt;
            opt.max_nodes = cfg.max_len;
            opt.snap_km = snap_km;
            opt.min_extent_km = min_extent_km;
            opt.cap = cfg.cap;
            opt.significance = significance_options(cfg);
            opt.significance.alpha = aar_alpha;
            const auto origins = load_origins(origins_path, g, snap_km);
            report = sl::station_path_significance(g, origins, lat, lon, values, opt);
            doc = sl::aar_report_to_json(g, comps, report);
        } else {
            doc = sl::aar_report_to_json(g, comps, report);
            doc.erase("station");
            doc.erase("origins");
        }
        sl::json config = {{"mask", mask_path},       {"values", values_path},   {"origins", origins_path},
                           {"station", station},      {"min_extent_km", min_extent_km},
                           {"max_edge_km", max_edge_km}, {"snap_km", snap_km},   {"alpha", aar_alpha},
                           {"m", cfg.replicates},     {"max_len", cfg.max_len}};
        doc["metadata"] = sl::make_metadata(config, cfg.seed, sl::null_model_name(sl::NullScope::Window));
        emit(doc, out);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const sl::Error& err) {
        std::cerr << "error [" << err.module() << "] " << sl::to_string(err.code()) << ": " << err.what() << '\n';
        if (!err.hint().empty()) std::cerr << "hint: " << err.hint() << '\n';
        return 2;
    } catch (const std::exception& err) {
        std::cerr << "error [io-cli] " << err.what() << '\n';
        return 2;
    }
}
