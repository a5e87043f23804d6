#pragma once

#include "spatial_link/bands.hpp"
#include "spatial_link/graph.hpp"
#include "spatial_link/paths.hpp"
#include "spatial_link/significance.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace spatial_link {

struct RunConfig {
    std::string source_path;
    std::string target_path;
    std::string mask_path;  // CMAD anomaly mask
    std::string format = "auto";

    ChangeOrientation source_orientation = ChangeOrientation::LossNegative;
    ChangeOrientation target_orientation = ChangeOrientation::LossNegative;
    std::optional<RegionWindow> window;
    bool global_bands = false;
    double ub_multiplier = 1.5;
    BandName band_source = BandName::Moderate;
    BandName band_target = BandName::Moderate;
    CellSelection selection = CellSelection::TwoSided;

    double d_max = 11.0;
    DistanceMetric metric = DistanceMetric::Euclidean;
    WeightVariant variant = WeightVariant::Standard;
    std::size_t max_len = 11;
    std::size_t cap = kDefaultPathCap;

    std::size_t replicates = 999;
    double alpha = 0.05;
    std::uint64_t seed = 42;
    NullScope null_scope = NullScope::Nodes;
    bool shared_null = false;
    bool benjamini_hochberg = false;

    bool sweep_bands = false;
    unsigned threads = 0;  // 0: SPATIAL_LINK_THREADS, then hardware
    std::string out_dir = "out";

    void validate() const;

    // Everything that determines results; threads and out_dir are left out so
    // that the echo is identical across runs that must agree byte for byte.
    nlohmann::json to_json() const;
    // Fields absent from `j` keep the values of `base`. Accepts either a bare
    // config object or a document carrying {metadata: {config: ...}}.
    static RunConfig from_json(const nlohmann::json& j, RunConfig base);
    static RunConfig from_json(const nlohmann::json& j);
};

struct Analysis {
    ThresholdBands source_bands;
    ThresholdBands target_bands;
    SpatialGraph graph;
    std::vector<LinkagePath> paths;
    std::vector<SignificanceResult> results;
    std::string note;  // set when the run ended early without error
};

// Bands -> cell sets -> graph. An empty source or target side yields an
// edgeless graph and a note instead of an error.
Analysis build_stage(const RunConfig& cfg, const ChangeGrid& source, const ChangeGrid& target,
                     const ChangeGrid* anomaly_mask = nullptr);

// build_stage, then paths and significance.
Analysis analyze(const RunConfig& cfg, const ChangeGrid& source, const ChangeGrid& target,
                 const ChangeGrid* anomaly_mask = nullptr);

// graph.json, paths.json, results.json, significant.geojson, frequency.csv
void write_artifacts(const RunConfig& cfg, const Analysis& a, const ChangeGrid& grid,
                     const std::filesystem::path& dir);

struct PipelineSummary {
    std::string label;  // "<src>_<tgt>" in a sweep, empty otherwise
    std::size_t nodes = 0;
    std::size_t edges = 0;
    std::size_t paths = 0;
    std::size_t significant = 0;
    std::string note;
};

// Loads the inputs named in `cfg` and writes all artifacts under cfg.out_dir
// (one subdirectory per band pair with sweep_bands).
std::vector<PipelineSummary> run_pipeline(const RunConfig& cfg);

// Same on grids already in memory.
std::vector<PipelineSummary> run_pipeline(const RunConfig& cfg, const ChangeGrid& source, const ChangeGrid& target,
                                          const ChangeGrid* anomaly_mask);

}  // namespace spatial_link
