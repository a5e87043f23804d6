#pragma once

#include "spatial_link/bands.hpp"
#include "spatial_link/paths.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace spatial_link {

// Background noise. "gaussian": each cell is non-zero with probability
// `density`, drawn from N(0, sigma); density 1 gives a plain Gaussian field.
// "zero": every cell is 0.
struct NoiseModel {
    std::string distribution = "gaussian";
    double sigma = 0.1;
    double density = 0.015;

    nlohmann::json to_json() const;
    static NoiseModel from_json(const nlohmann::json& j);
};

struct GridDims {
    std::size_t rows = 121;
    std::size_t cols = 401;
};

using CellIndex = std::pair<std::size_t, std::size_t>;  // (row, col)

struct PlantSpec {
    GridDims dims;
    std::vector<CellIndex> chain;  // Source cells first, then Target cells
    std::vector<double> values;    // loss-signed; empty = middle of `band` on the background
    BandName band = BandName::Moderate;
    std::size_t split = 0;         // chain[split..] are Target cells
    NoiseModel noise;
    std::uint64_t seed = 1;
    // Target field is valid in rows [0, shelf_rows), source field in the rest.
    // 0 leaves both fields valid everywhere.
    std::size_t shelf_rows = 12;
    double d_max = 11.0;
    std::size_t max_len = 11;
    ChangeOrientation orientation = ChangeOrientation::LossNegative;

    nlohmann::json to_json() const;
    static PlantSpec from_json(const nlohmann::json& j);
};

struct SyntheticFields {
    ChangeGrid source;
    ChangeGrid target;
};

struct SyntheticInstance {
    ChangeGrid source;
    ChangeGrid target;
    std::vector<CellIndex> oracle;  // planted chain, source to target
};

// Registration of the cropped Antarctic window used for synthetic grids.
GridRegistration synthetic_registration();

// Magnitude (in units of sigma) at the middle of a band of the half-normal law.
double band_center_sigma(BandName band);

// 11-cell vertical chain with spacing 3 ending one row inside the shelf; the
// column varies with the seed.
PlantSpec default_plant(std::uint64_t seed, BandName band = BandName::Moderate,
                        NoiseModel noise = {});

// Throws ChainViolation when the chain breaks the spacing, length, bounds,
// split or shelf rules.
void validate_plant(const PlantSpec& spec);

SyntheticFields generate_null(const GridDims& dims, const NoiseModel& noise, std::uint64_t seed,
                              std::size_t shelf_rows = 12);

SyntheticInstance generate(const PlantSpec& spec);

// The planted chain as a path of `graph`, or nullopt when a chain cell is not a
// node or consecutive cells are not adjacent.
std::optional<LinkagePath> oracle_path(const SpatialGraph& graph, const std::vector<CellIndex>& oracle);

// Fraction of oracle cells visited by `path`.
double oracle_overlap(const SpatialGraph& graph, const LinkagePath& path, const std::vector<CellIndex>& oracle);

}  // namespace spatial_link
