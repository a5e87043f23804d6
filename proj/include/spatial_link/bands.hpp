#pragma once

#include "spatial_link/grid.hpp"

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace spatial_link {

// Which sign of change counts as loss (retreat, melt) for a field.
enum class ChangeOrientation { LossNegative, LossPositive };

enum class BandName { Moderate, High, Anomalous };

enum class NodeKind { Source, Target, Neutral };

// Which cells a band filter admits.
//   LossOnly: loss-signed cells only.
//   TwoSided: cells of either sign whose magnitude is in the band, so that
//             sign consistency between neighbours carries information.
enum class CellSelection { LossOnly, TwoSided };

inline constexpr std::array<BandName, 3> all_bands{BandName::Moderate, BandName::High,
                                                   BandName::Anomalous};

std::string to_string(ChangeOrientation o);
std::string to_string(BandName b);
std::string to_string(NodeKind k);
std::string to_string(CellSelection s);
ChangeOrientation parse_orientation(const std::string& s);
BandName parse_band(const std::string& s);
NodeKind parse_kind(const std::string& s);
CellSelection parse_selection(const std::string& s);

inline bool is_loss(double value, ChangeOrientation o) noexcept {
    return o == ChangeOrientation::LossNegative ? value < 0.0 : value > 0.0;
}

// Quantile thresholds over loss-oriented magnitudes.
//   Moderate  = [median, q3)
//   High      = [q3, ub)
//   Anomalous = [ub, +inf)
struct ThresholdBands {
    double median = 0.0;
    double q3 = 0.0;
    double ub = 0.0;
    double q1 = 0.0;
    std::size_t count = 0;  // oriented cells the quantiles were taken over

    bool in_band(double magnitude, BandName band) const noexcept;
    std::optional<BandName> classify(double magnitude) const noexcept;
};

// Linear interpolation between order statistics at h = (n-1)p.
// `sorted` must be ascending and non-empty.
double quantile_sorted(std::span<const double> sorted, double p);

ThresholdBands bands_from_magnitudes(std::vector<double> magnitudes, double ub_multiplier = 1.5);

// Bands over the loss-signed magnitudes of the valid cells of `grid`.
ThresholdBands compute_threshold_bands(const ChangeGrid& grid, ChangeOrientation orientation,
                                       double ub_multiplier = 1.5);

// Same, restricted to a window of the grid (equivalent to cropping first).
ThresholdBands compute_threshold_bands(const ChangeGrid& grid, const RegionWindow& window,
                                       ChangeOrientation orientation, double ub_multiplier = 1.5);

// The admission test a node must pass for one field: value in `band` under
// `orientation` and `selection`. Zero change never passes.
struct BandFilter {
    ThresholdBands bands;
    BandName band = BandName::Moderate;
    ChangeOrientation orientation = ChangeOrientation::LossNegative;
    CellSelection selection = CellSelection::LossOnly;

    bool passes(double value) const noexcept;
    // Magnitude at or above the median, i.e. in any of the three bands.
    bool passes_any_band(double value) const noexcept;
};

struct Cell {
    std::size_t row = 0;
    std::size_t col = 0;
    double value = 0.0;

    bool operator==(const Cell&) const = default;
};

struct CellSet {
    NodeKind kind = NodeKind::Source;
    BandName band = BandName::Moderate;
    std::vector<Cell> cells;  // row-major order
};

CellSet classify_cells(const ChangeGrid& grid, const ThresholdBands& bands, BandName band,
                       NodeKind kind, const RegionWindow& window,
                       ChangeOrientation orientation = ChangeOrientation::LossNegative,
                       CellSelection selection = CellSelection::LossOnly);

}  // namespace spatial_link
