#include "spatial_link/pipeline.hpp"

#include "spatial_link/error.hpp"
#include "spatial_link/io.hpp"
#include "spatial_link/parallel.hpp"

#include <map>

namespace spatial_link {

namespace {

[[noreturn]] void bad_config(const std::string& msg, std::string hint = {}) {
    throw Error(module::io_cli, ErrorCode::InvalidArgument, msg, std::move(hint));
}

CellSet anomalous_cells(const ChangeGrid& source, const ChangeGrid& mask, const RegionWindow& w) {
    CellSet set{NodeKind::Source, BandName::Anomalous, {}};
    for (std::size_t r = w.row_min; r <= w.row_max; ++r)
        for (std::size_t c = w.col_min; c <= w.col_max; ++c)
            if (source.valid(r, c) && mask.valid(r, c) && mask.value(r, c) != 0.0)
                set.cells.push_back({r, c, source.value(r, c)});
    return set;
}

CellSet union_cells(const CellSet& a, const CellSet& b) {
    std::map<std::pair<std::size_t, std::size_t>, Cell> cells;
    for (const auto& c : a.cells) cells[{c.row, c.col}] = c;
    for (const auto& c : b.cells) cells[{c.row, c.col}] = c;
    CellSet out{a.kind, a.band, {}};
    for (const auto& [rc, c] : cells) out.cells.push_back(c);
    return out;
}

}  // namespace

void RunConfig::validate() const {
    if (!(d_max > 0)) bad_config("dmax must be positive");
    if (max_len < 2) bad_config("max-len must be at least 2");
    if (replicates < 1) bad_config("m must be at least 1");
    if (!(alpha > 0 && alpha < 1)) bad_config("alpha must lie in (0, 1)");
    if (!(ub_multiplier >= 0)) bad_config("ub multiplier must be non-negative");
    if (cap < 1) bad_config("cap must be at least 1");
    if (variant == WeightVariant::Aar) bad_config("the aar variant runs through the aar subcommand", "use spatial-link aar");
    if (variant == WeightVariant::Cmad && mask_path.empty()) {
        bad_config("the cmad variant needs an anomaly mask", "pass --mask");
    }
}

nlohmann::json RunConfig::to_json() const {
    return {{"source", source_path},
            {"target", target_path},
            {"mask", mask_path},
            {"format", format},
            {"orientation_source", to_string(source_orientation)},
            {"orientation_target", to_string(target_orientation)},
            {"window", window ? nlohmann::json(window->to_string()) : nlohmann::json(nullptr)},
            {"global_bands", global_bands},
            {"ub_multiplier", ub_multiplier},
            {"band_source", to_string(band_source)},
            {"band_target", to_string(band_target)},
            {"selection", to_string(selection)},
            {"dmax", d_max},
            {"metric", to_string(metric)},
            {"variant", to_string(variant)},
            {"max_len", max_len},
            {"cap", cap},
            {"m", replicates},
            {"alpha", alpha},
            {"seed", seed},
            {"null_scope", to_string(null_scope)},
            {"shared_null", shared_null},
            {"benjamini_hochberg", benjamini_hochberg},
            {"sweep_bands", sweep_bands}};
}

RunConfig RunConfig::from_json(const nlohmann::json& doc, RunConfig c) {
    const auto& j = (doc.contains("metadata") && doc["metadata"].contains("config")) ? doc["metadata"]["config"] : doc;
    if (!j.is_object()) bad_config("config must be a JSON object");
    try {
        c.source_path = j.value("source", c.source_path);
        c.target_path = j.value("target", c.target_path);
        c.mask_path = j.value("mask", c.mask_path);
        c.format = j.value("format", c.format);
        if (j.contains("orientation_source")) c.source_orientation = parse_orientation(j["orientation_source"]);
        if (j.contains("orientation_target")) c.target_orientation = parse_orientation(j["orientation_target"]);
        if (j.contains("window")) {
            if (j["window"].is_null()) c.window.reset();
            else c.window = RegionWindow::parse(j["window"].get<std::string>());
        }
        c.global_bands = j.value("global_bands", c.global_bands);
        c.ub_multiplier = j.value("ub_multiplier", c.ub_multiplier);
        if (j.contains("band_source")) c.band_source = parse_band(j["band_source"]);
        if (j.contains("band_target")) c.band_target = parse_band(j["band_target"]);
        if (j.contains("selection")) c.selection = parse_selection(j["selection"]);
        c.d_max = j.value("dmax", c.d_max);
        if (j.contains("metric")) c.metric = parse_metric(j["metric"]);
        if (j.contains("variant")) c.variant = parse_variant(j["variant"]);
        c.max_len = j.value("max_len", c.max_len);
        c.cap = j.value("cap", c.cap);
        c.replicates = j.value("m", c.replicates);
        c.alpha = j.value("alpha", c.alpha);
        c.seed = j.value("seed", c.seed);
        if (j.contains("null_scope")) c.null_scope = parse_null_scope(j["null_scope"]);
        c.shared_null = j.value("shared_null", c.shared_null);
        c.benjamini_hochberg = j.value("benjamini_hochberg", c.benjamini_hochberg);
        c.sweep_bands = j.value("sweep_bands", c.sweep_bands);
        c.threads = j.value("threads", c.threads);
        c.out_dir = j.value("out_dir", c.out_dir);
    } catch (const nlohmann::json::exception& e) {
        bad_config(std::string("config: ") + e.what());
    }
    return c;
}

RunConfig RunConfig::from_json(const nlohmann::json& j) { return from_json(j, RunConfig{}); }

Analysis build_stage(const RunConfig& cfg, const ChangeGrid& source, const ChangeGrid& target,
                     const ChangeGrid* mask) {
    if (!source.same_shape(target)) {
        throw Error(module::grid_core, ErrorCode::DimMismatch, "source and target grids differ in shape",
                    "resample both fields onto the same grid");
    }
    const RegionWindow window = cfg.window.value_or(source.full_window());
    check_window(source, window);

    Analysis a;
    if (cfg.global_bands) {
        a.source_bands = compute_threshold_bands(source, cfg.source_orientation, cfg.ub_multiplier);
        a.target_bands = compute_threshold_bands(target, cfg.target_orientation, cfg.ub_multiplier);
    } else {
        a.source_bands = compute_threshold_bands(source, window, cfg.source_orientation, cfg.ub_multiplier);
        a.target_bands = compute_threshold_bands(target, window, cfg.target_orientation, cfg.ub_multiplier);
    }

    GraphParams params;
    params.d_max = cfg.d_max;
    params.metric = cfg.metric;
    params.variant = cfg.variant;
    params.source_filter = {a.source_bands, cfg.band_source, cfg.source_orientation, cfg.selection};
    params.target_filter = {a.target_bands, cfg.band_target, cfg.target_orientation, cfg.selection};

    auto src_cells = classify_cells(source, a.source_bands, cfg.band_source, NodeKind::Source, window,
                                    cfg.source_orientation, cfg.selection);
    const auto tgt_cells = classify_cells(target, a.target_bands, cfg.band_target, NodeKind::Target, window,
                                          cfg.target_orientation, cfg.selection);
    try {
        if (cfg.variant == WeightVariant::Cmad) {
            if (mask == nullptr) bad_config("the cmad variant needs an anomaly mask", "pass --mask");
            if (!mask->same_shape(source)) {
                throw Error(module::spatial_graph, ErrorCode::MaskDimMismatch, "anomaly mask differs in shape from the grids",
                            "resample the mask with resample_nearest to the analysis grid");
            }
            src_cells = union_cells(src_cells, anomalous_cells(source, *mask, window));
            a.graph = build_graph_cmad(src_cells, tgt_cells, *mask, source.rows(), source.cols(), params);
        } else {
            a.graph = build_graph(src_cells, tgt_cells, params);
        }
    } catch (const Error& e) {
        if (e.code() != ErrorCode::EmptySide) throw;
        a.graph = SpatialGraph({}, {}, params);
        a.note = std::string("empty-side: ") + e.what();
    }
    return a;
}

Analysis analyze(const RunConfig& cfg, const ChangeGrid& source, const ChangeGrid& target,
                 const ChangeGrid* mask) {
    Analysis a = build_stage(cfg, source, target, mask);
    if (!a.note.empty()) return a;
    const RegionWindow window = cfg.window.value_or(source.full_window());

    const unsigned threads = resolve_threads(cfg.threads);
    a.paths = extract_all_paths(a.graph, cfg.max_len, cfg.cap, threads);

    NullContext ctx;
    ctx.graph = &a.graph;
    ctx.scope = cfg.null_scope;
    ctx.source = &source;
    ctx.target = &target;
    ctx.anomaly_mask = cfg.variant == WeightVariant::Cmad ? mask : nullptr;
    ctx.window = window;
    SignificanceOptions opt;
    opt.replicates = cfg.replicates;
    opt.seeds.base_seed = cfg.seed;
    opt.alpha = cfg.alpha;
    opt.threads = threads;
    opt.shared_null = cfg.shared_null;
    opt.benjamini_hochberg = cfg.benjamini_hochberg;
    a.results = test_paths(ctx, a.paths, opt);
    return a;
}

void write_artifacts(const RunConfig& cfg, const Analysis& a, const ChangeGrid& grid,
                     const std::filesystem::path& dir) {
    const auto meta = make_metadata(cfg.to_json(), cfg.seed, null_model_name(cfg.null_scope));

    std::vector<LinkagePath> significant;
    std::vector<double> sig_p;
    for (std::size_t i = 0; i < a.paths.size(); ++i) {
        if (!a.results[i].significant) continue;
        significant.push_back(a.paths[i]);
        sig_p.push_back(a.results[i].p_value);
    }

    auto graph_doc = graph_to_json(a.graph);
    graph_doc["metadata"] = meta;
    graph_doc["bands"] = {{"source", bands_to_json(a.source_bands)}, {"target", bands_to_json(a.target_bands)}};
    write_json(dir / "graph.json", graph_doc);

    write_json(dir / "paths.json", {{"metadata", meta}, {"paths", paths_to_json(a.graph, a.paths)}});

    nlohmann::json summary = {{"nodes", a.graph.node_count()},
                              {"edges", a.graph.edges().size()},
                              {"paths", a.paths.size()},
                              {"significant", significant.size()}};
    if (!a.note.empty()) summary["note"] = a.note;
    write_json(dir / "results.json", {{"metadata", meta}, {"summary", summary}, {"results", results_to_json(a.results)}});

    auto geo = export_geojson(a.graph, significant, sig_p, grid.registration());
    geo["metadata"] = meta;
    write_json(dir / "significant.geojson", geo);

    const auto raster = linkage_frequency(a.graph, significant, grid.rows(), grid.cols());
    write_text(dir / "frequency.csv", "# " + meta.dump() + "\n" + frequency_csv(raster));
}

std::vector<PipelineSummary> run_pipeline(const RunConfig& cfg, const ChangeGrid& source, const ChangeGrid& target,
                                          const ChangeGrid* mask) {
    cfg.validate();
    std::vector<std::pair<BandName, BandName>> pairs;
    if (cfg.sweep_bands) {
        for (auto s : all_bands)
            for (auto t : all_bands) pairs.emplace_back(s, t);
    } else {
        pairs.emplace_back(cfg.band_source, cfg.band_target);
    }

    std::vector<PipelineSummary> out;
    for (const auto& [s, t] : pairs) {
        RunConfig run = cfg;
        run.band_source = s;
        run.band_target = t;
        run.sweep_bands = false;
        PipelineSummary summary;
        std::filesystem::path dir = cfg.out_dir;
        if (cfg.sweep_bands) {
            summary.label = to_string(s) + "_" + to_string(t);
            dir /= summary.label;
        }
        const auto a = analyze(run, source, target, mask);
        write_artifacts(run, a, source, dir);
        summary.nodes = a.graph.node_count();
        summary.edges = a.graph.edges().size();
        summary.paths = a.paths.size();
        for (const auto& r : a.results) summary.significant += r.significant ? 1 : 0;
        summary.note = a.note;
        out.push_back(summary);
    }
    return out;
}

std::vector<PipelineSummary> run_pipeline(const RunConfig& cfg) {
    cfg.validate();
    if (cfg.source_path.empty() || cfg.target_path.empty()) {
        bad_config("pipeline needs --source and --target");
    }
    const auto fmt = parse_grid_format(cfg.format);
    const auto source = load_grid(cfg.source_path, fmt);
    const auto target = load_grid(cfg.target_path, fmt);
    std::optional<ChangeGrid> mask;
    if (!cfg.mask_path.empty()) mask = load_grid(cfg.mask_path, fmt);
    return run_pipeline(cfg, source, target, mask ? &*mask : nullptr);
}

}  // namespace spatial_link
