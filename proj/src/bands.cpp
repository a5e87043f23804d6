#include "spatial_link/bands.hpp"

#include "spatial_link/error.hpp"

#include <algorithm>
#include <cmath>

namespace spatial_link {

namespace {
[[noreturn]] void bad_name(const std::string& what, const std::string& s) {
    throw Error(module::grid_core, ErrorCode::InvalidArgument, "unknown " + what + " '" + s + "'");
}
}  // namespace

std::string to_string(ChangeOrientation o) {
    return o == ChangeOrientation::LossNegative ? "loss-negative" : "loss-positive";
}

std::string to_string(BandName b) {
    switch (b) {
        case BandName::Moderate: return "moderate";
        case BandName::High: return "high";
        case BandName::Anomalous: return "anomalous";
    }
    return "?";
}

std::string to_string(NodeKind k) {
    switch (k) {
        case NodeKind::Source: return "source";
        case NodeKind::Target: return "target";
        case NodeKind::Neutral: return "neutral";
    }
    return "?";
}

std::string to_string(CellSelection s) {
    return s == CellSelection::LossOnly ? "loss-only" : "two-sided";
}

ChangeOrientation parse_orientation(const std::string& s) {
    if (s == "loss-negative") return ChangeOrientation::LossNegative;
    if (s == "loss-positive") return ChangeOrientation::LossPositive;
    bad_name("orientation", s);
}

BandName parse_band(const std::string& s) {
    if (s == "moderate") return BandName::Moderate;
    if (s == "high") return BandName::High;
    if (s == "anomalous") return BandName::Anomalous;
    bad_name("band", s);
}

NodeKind parse_kind(const std::string& s) {
    if (s == "source") return NodeKind::Source;
    if (s == "target") return NodeKind::Target;
    if (s == "neutral") return NodeKind::Neutral;
    bad_name("node kind", s);
}

CellSelection parse_selection(const std::string& s) {
    if (s == "loss-only") return CellSelection::LossOnly;
    if (s == "two-sided") return CellSelection::TwoSided;
    bad_name("cell selection", s);
}

bool ThresholdBands::in_band(double m, BandName band) const noexcept {
    switch (band) {
        case BandName::Moderate: return m >= median && m < q3;
        case BandName::High: return m >= q3 && m < ub;
        case BandName::Anomalous: return m >= ub;
    }
    return false;
}

std::optional<BandName> ThresholdBands::classify(double m) const noexcept {
    for (auto b : all_bands)
        if (in_band(m, b)) return b;
    return std::nullopt;
}

double quantile_sorted(std::span<const double> sorted, double p) {
    const double h = static_cast<double>(sorted.size() - 1) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

ThresholdBands bands_from_magnitudes(std::vector<double> magnitudes, double ub_multiplier) {
    if (magnitudes.size() < 4) {
        throw Error(module::grid_core, ErrorCode::InsufficientData,
                    "threshold bands need at least 4 loss-oriented cells, found " +
                        std::to_string(magnitudes.size()),
                    "widen the window, switch orientation, or use global band statistics");
    }
    std::sort(magnitudes.begin(), magnitudes.end());
    ThresholdBands b;
    b.count = magnitudes.size();
    b.q1 = quantile_sorted(magnitudes, 0.25);
    b.median = quantile_sorted(magnitudes, 0.5);
    b.q3 = quantile_sorted(magnitudes, 0.75);
    b.ub = b.q3 + ub_multiplier * (b.q3 - b.q1);
    return b;
}

ThresholdBands compute_threshold_bands(const ChangeGrid& grid, ChangeOrientation orientation,
                                       double ub_multiplier) {
    return compute_threshold_bands(grid, grid.full_window(), orientation, ub_multiplier);
}

ThresholdBands compute_threshold_bands(const ChangeGrid& grid, const RegionWindow& w,
                                       ChangeOrientation orientation, double ub_multiplier) {
    check_window(grid, w);
    std::vector<double> mags;
    for (std::size_t r = w.row_min; r <= w.row_max; ++r)
        for (std::size_t c = w.col_min; c <= w.col_max; ++c)
            if (grid.valid(r, c) && is_loss(grid.value(r, c), orientation))
                mags.push_back(std::abs(grid.value(r, c)));
    return bands_from_magnitudes(std::move(mags), ub_multiplier);
}

bool BandFilter::passes(double value) const noexcept {
    if (!std::isfinite(value) || value == 0.0) return false;
    if (selection == CellSelection::LossOnly && !is_loss(value, orientation)) return false;
    return bands.in_band(std::abs(value), band);
}

bool BandFilter::passes_any_band(double value) const noexcept {
    if (!std::isfinite(value) || value == 0.0) return false;
    if (selection == CellSelection::LossOnly && !is_loss(value, orientation)) return false;
    return std::abs(value) >= bands.median;
}

CellSet classify_cells(const ChangeGrid& grid, const ThresholdBands& bands, BandName band,
                       NodeKind kind, const RegionWindow& window, ChangeOrientation orientation,
                       CellSelection selection) {
    CellSet out{kind, band, {}};
    const BandFilter filter{bands, band, orientation, selection};
    const auto r1 = std::min(window.row_max, grid.rows() - 1);
    const auto c1 = std::min(window.col_max, grid.cols() - 1);
    for (std::size_t r = window.row_min; r <= r1; ++r)
        for (std::size_t c = window.col_min; c <= c1; ++c)
            if (grid.valid(r, c) && filter.passes(grid.value(r, c)))
                out.cells.push_back({r, c, grid.value(r, c)});
    return out;
}

}  // namespace spatial_link
