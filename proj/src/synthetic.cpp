#include "spatial_link/synthetic.hpp"

#include "spatial_link/error.hpp"
#include "spatial_link/significance.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

namespace spatial_link {

namespace {

[[noreturn]] void violation(const std::string& what) {
    throw Error(module::synthetic, ErrorCode::ChainViolation, what, "fix the chain in the plant spec");
}

// Half-normal quantiles in units of sigma.
constexpr double kHalfNormalQ1 = 0.31863936396437514;
constexpr double kHalfNormalMedian = 0.6744897501960817;
constexpr double kHalfNormalQ3 = 1.1503493803760079;

// Middle of the requested band as measured on the background itself, so the
// chain qualifies however the sample quantiles fall. Falls back to the
// half-normal band centre when the background has too few loss cells.
double planted_magnitude(const ChangeGrid& background, const PlantSpec& spec) {
    std::vector<double> mags;
    for (std::size_t i = 0; i < background.size(); ++i) {
        const double v = background.values()[i];
        if (background.valid_mask()[i] && is_loss(v, spec.orientation)) mags.push_back(std::abs(v));
    }
    if (mags.size() < 4) return band_center_sigma(spec.band) * spec.noise.sigma;
    const auto b = bands_from_magnitudes(std::move(mags));
    switch (spec.band) {
        case BandName::Moderate: return 0.5 * (b.median + b.q3);
        case BandName::High: return 0.5 * (b.q3 + b.ub);
        case BandName::Anomalous: return b.ub + 1.2 * spec.noise.sigma;
    }
    return 0.0;
}

}  // namespace

nlohmann::json NoiseModel::to_json() const {
    return {{"distribution", distribution}, {"sigma", sigma}, {"density", density}};
}

NoiseModel NoiseModel::from_json(const nlohmann::json& j) {
    NoiseModel n;
    n.distribution = j.value("distribution", n.distribution);
    n.sigma = j.value("sigma", n.sigma);
    n.density = j.value("density", n.density);
    if (n.distribution != "gaussian" && n.distribution != "zero") {
        throw Error(module::synthetic, ErrorCode::InvalidArgument,
                    "unknown noise distribution '" + n.distribution + "'", "use gaussian or zero");
    }
    if (!(n.sigma > 0) || !(n.density >= 0 && n.density <= 1)) {
        throw Error(module::synthetic, ErrorCode::InvalidArgument, "noise needs sigma > 0 and density in [0,1]");
    }
    return n;
}

nlohmann::json PlantSpec::to_json() const {
    nlohmann::json cells = nlohmann::json::array();
    for (const auto& [r, c] : chain) cells.push_back({r, c});
    return {{"rows", dims.rows},         {"cols", dims.cols},
            {"chain", cells},            {"values", values},
            {"band", to_string(band)},   {"split", split},
            {"noise", noise.to_json()},  {"seed", seed},
            {"shelf_rows", shelf_rows},  {"d_max", d_max},
            {"max_len", max_len},        {"orientation", to_string(orientation)}};
}

PlantSpec PlantSpec::from_json(const nlohmann::json& j) {
    const auto seed = j.value("seed", std::uint64_t{1});
    const auto band = parse_band(j.value("band", std::string("moderate")));
    const auto noise = NoiseModel::from_json(j.value("noise", nlohmann::json::object()));
    PlantSpec s = default_plant(seed, band, noise);
    s.dims.rows = j.value("rows", s.dims.rows);
    s.dims.cols = j.value("cols", s.dims.cols);
    if (j.contains("chain")) {
        s.chain.clear();
        for (const auto& rc : j["chain"]) s.chain.emplace_back(rc.at(0).get<std::size_t>(), rc.at(1).get<std::size_t>());
        s.split = s.chain.empty() ? 0 : s.chain.size() - 1;
    }
    s.values = j.value("values", std::vector<double>{});
    s.split = j.value("split", s.split);
    s.shelf_rows = j.value("shelf_rows", s.shelf_rows);
    s.d_max = j.value("d_max", s.d_max);
    s.max_len = j.value("max_len", s.max_len);
    if (j.contains("orientation")) s.orientation = parse_orientation(j["orientation"].get<std::string>());
    return s;
}

GridRegistration synthetic_registration() {
    auto reg = GridRegistration::quarter_degree();
    reg.lon0 += 200 * reg.dlon;  // window starts at column 200 of the global grid
    return reg;
}

double band_center_sigma(BandName band) {
    const double ub = kHalfNormalQ3 + 1.5 * (kHalfNormalQ3 - kHalfNormalQ1);
    switch (band) {
        case BandName::Moderate: return 0.5 * (kHalfNormalMedian + kHalfNormalQ3);
        case BandName::High: return 0.5 * (kHalfNormalQ3 + ub);
        case BandName::Anomalous: return ub + 1.2;
    }
    return 0.0;
}

PlantSpec default_plant(std::uint64_t seed, BandName band, NoiseModel noise) {
    PlantSpec s;
    s.band = band;
    s.noise = noise;
    s.seed = seed;
    const std::size_t col = 20 + static_cast<std::size_t>(splitmix64(seed) % 361);
    for (std::size_t k = 0; k < 11; ++k) s.chain.emplace_back(40 - 3 * k, col);
    s.split = 10;
    return s;
}

void validate_plant(const PlantSpec& s) {
    if (s.chain.size() < 2) violation("chain needs at least two cells");
    if (s.chain.size() > s.max_len) {
        violation("chain has " + std::to_string(s.chain.size()) + " cells, more than L = " + std::to_string(s.max_len));
    }
    if (s.split == 0 || s.split >= s.chain.size()) violation("split index must leave at least one source and one target");
    if (!s.values.empty() && s.values.size() != s.chain.size()) violation("one value per chain cell is required");
    std::set<CellIndex> seen;
    for (std::size_t i = 0; i < s.chain.size(); ++i) {
        const auto [r, c] = s.chain[i];
        if (r >= s.dims.rows || c >= s.dims.cols) violation("chain cell outside the grid");
        if (!seen.insert(s.chain[i]).second) violation("chain repeats a cell");
        if (s.shelf_rows > 0) {
            const bool on_shelf = r < s.shelf_rows;
            if (i < s.split && on_shelf) violation("source cell lies on the shelf");
            if (i >= s.split && !on_shelf) violation("target cell lies off the shelf");
        }
        if (i > 0) {
            const auto [pr, pc] = s.chain[i - 1];
            const double d = grid_distance(pr, pc, r, c);
            if (d > s.d_max) {
                violation("chain spacing " + std::to_string(d) + " exceeds d_max " + std::to_string(s.d_max));
            }
        }
        if (!s.values.empty() && !is_loss(s.values[i], s.orientation)) violation("chain values must be loss-signed");
    }
}

SyntheticFields generate_null(const GridDims& dims, const NoiseModel& noise, std::uint64_t seed,
                              std::size_t shelf_rows) {
    if (dims.rows == 0 || dims.cols == 0) {
        throw Error(module::synthetic, ErrorCode::InvalidArgument, "grid dims must be positive");
    }
    std::mt19937_64 rng(seed);
    std::bernoulli_distribution present(noise.distribution == "zero" ? 0.0 : noise.density);
    std::normal_distribution<double> gauss(0.0, noise.sigma);
    const auto n = dims.rows * dims.cols;

    auto field = [&](bool shelf) {
        std::vector<double> values(n, 0.0);
        std::vector<std::uint8_t> valid(n, 1);
        for (std::size_t i = 0; i < n; ++i) {
            // Draw for every cell so both fields consume the engine identically.
            const bool on = present(rng);
            const double v = gauss(rng);
            if (on) values[i] = static_cast<double>(static_cast<float>(v));
            if (shelf_rows > 0) valid[i] = ((i / dims.cols) < shelf_rows) == shelf;
        }
        return ChangeGrid(dims.rows, dims.cols, std::move(values), std::move(valid), synthetic_registration());
    };
    auto source = field(false);
    auto target = field(true);
    return {std::move(source), std::move(target)};
}

SyntheticInstance generate(const PlantSpec& spec) {
    validate_plant(spec);
    auto null = generate_null(spec.dims, spec.noise, spec.seed, spec.shelf_rows);

    const double sign = spec.orientation == ChangeOrientation::LossNegative ? -1.0 : 1.0;
    auto plant = [&](const ChangeGrid& g, std::size_t begin, std::size_t end) {
        const double magnitude = planted_magnitude(g, spec);
        auto values = g.values();
        auto valid = g.valid_mask();
        for (std::size_t i = begin; i < end; ++i) {
            const auto idx = g.index(spec.chain[i].first, spec.chain[i].second);
            const double v = spec.values.empty() ? sign * magnitude : spec.values[i];
            values[idx] = static_cast<double>(static_cast<float>(v));
            valid[idx] = 1;
        }
        return ChangeGrid(g.rows(), g.cols(), std::move(values), std::move(valid), g.registration());
    };
    SyntheticInstance out;
    out.source = plant(null.source, 0, spec.split);
    out.target = plant(null.target, spec.split, spec.chain.size());
    out.oracle = spec.chain;
    return out;
}

std::optional<LinkagePath> oracle_path(const SpatialGraph& graph, const std::vector<CellIndex>& oracle) {
    std::vector<std::size_t> ids;
    for (const auto& [r, c] : oracle) {
        const auto id = graph.node_at(r, c);
        if (id == SpatialGraph::npos) return std::nullopt;
        ids.push_back(id);
    }
    for (std::size_t i = 1; i < ids.size(); ++i)
        if (graph.find_edge(ids[i - 1], ids[i]) == SpatialGraph::npos) return std::nullopt;
    return make_path(graph, std::move(ids));
}

double oracle_overlap(const SpatialGraph& graph, const LinkagePath& path, const std::vector<CellIndex>& oracle) {
    if (oracle.empty()) return 0.0;
    std::set<CellIndex> cells;
    for (auto id : path.nodes) cells.insert({graph.nodes()[id].row, graph.nodes()[id].col});
    const auto hit = std::count_if(oracle.begin(), oracle.end(), [&](const CellIndex& c) { return cells.count(c) > 0; });
    return static_cast<double>(hit) / static_cast<double>(oracle.size());
}

}  // namespace spatial_link
