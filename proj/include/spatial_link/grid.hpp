#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace spatial_link {

// Affine mapping from grid indices to geographic cell centers.
struct GridRegistration {
    double lat0 = -90.0;   // latitude of row 0 cell center
    double lon0 = -180.0;  // longitude of col 0 cell center
    double dlat = 0.25;
    double dlon = 0.25;
    double cell_km = 25.0;

    double latitude(double row) const noexcept { return lat0 + row * dlat; }
    double longitude(double col) const noexcept { return lon0 + col * dlon; }

    // Global 0.25 degree grid with row 0 at the South Pole.
    static GridRegistration quarter_degree() { return {}; }

    void validate() const;
    bool operator==(const GridRegistration&) const = default;
};

// Inclusive index window.
struct RegionWindow {
    std::size_t row_min = 0;
    std::size_t row_max = 0;
    std::size_t col_min = 0;
    std::size_t col_max = 0;

    std::size_t rows() const noexcept { return row_max - row_min + 1; }
    std::size_t cols() const noexcept { return col_max - col_min + 1; }
    bool contains(std::size_t r, std::size_t c) const noexcept {
        return r >= row_min && r <= row_max && c >= col_min && c <= col_max;
    }

    // Parses "r0:r1,c0:c1".
    static RegionWindow parse(const std::string& text);
    std::string to_string() const;

    bool operator==(const RegionWindow&) const = default;
};

// Dense row-major raster of change values with a validity mask.
// Immutable after construction; all invariants are checked by the constructor.
class ChangeGrid {
public:
    ChangeGrid() = default;
    ChangeGrid(std::size_t rows, std::size_t cols, std::vector<double> values,
               std::vector<std::uint8_t> valid, GridRegistration registration);

    // All cells valid.
    ChangeGrid(std::size_t rows, std::size_t cols, std::vector<double> values,
               GridRegistration registration = {});

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t size() const noexcept { return values_.size(); }
    std::size_t index(std::size_t r, std::size_t c) const noexcept { return r * cols_ + c; }

    double value(std::size_t r, std::size_t c) const noexcept { return values_[index(r, c)]; }
    bool valid(std::size_t r, std::size_t c) const noexcept { return valid_[index(r, c)] != 0; }

    const std::vector<double>& values() const noexcept { return values_; }
    const std::vector<std::uint8_t>& valid_mask() const noexcept { return valid_; }
    const GridRegistration& registration() const noexcept { return registration_; }

    RegionWindow full_window() const;
    bool same_shape(const ChangeGrid& other) const noexcept {
        return rows_ == other.rows_ && cols_ == other.cols_;
    }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> values_;
    std::vector<std::uint8_t> valid_;
    GridRegistration registration_;
};

enum class GridFormat {
    RawJson,  // float32 LE payload + JSON sidecar
    Csv,      // row,col,value[,valid]
    Auto,     // decided by file extension
};

GridFormat parse_grid_format(const std::string& name);

ChangeGrid load_grid(const std::filesystem::path& path, GridFormat format = GridFormat::Auto);

// Writes `<stem>.json` + `<stem>.raw` (+ `<stem>.mask` when any cell is invalid)
// for RawJson, or a CSV listing every cell for Csv.
void save_grid(const ChangeGrid& grid, const std::filesystem::path& path,
               GridFormat format = GridFormat::Auto);

ChangeGrid resample_nearest(const ChangeGrid& grid, std::size_t target_rows,
                            std::size_t target_cols);

ChangeGrid crop_region(const ChangeGrid& grid, const RegionWindow& window);

// Per-cell b - a, valid where both inputs are valid.
ChangeGrid diff_grids(const ChangeGrid& a, const ChangeGrid& b);

void check_window(const ChangeGrid& grid, const RegionWindow& window);

}  // namespace spatial_link
