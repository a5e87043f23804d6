#include "spatial_link/grid.hpp"

#include "spatial_link/error.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

namespace spatial_link {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

[[noreturn]] void fail(ErrorCode code, const std::string& msg, std::string hint = {}) {
    throw Error(module::grid_core, code, msg, std::move(hint));
}

std::string lower_ext(const fs::path& p) {
    auto ext = p.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
    return ext;
}

std::vector<char> read_bytes(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::IoError, "cannot open " + path.string(), "check the input path");
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

float decode_f32_le(const char* p) {
    std::uint32_t bits = 0;
    for (int i = 3; i >= 0; --i) bits = (bits << 8) | static_cast<unsigned char>(p[i]);
    return std::bit_cast<float>(bits);
}

void encode_f32_le(float v, char* out) {
    auto bits = std::bit_cast<std::uint32_t>(v);
    for (int i = 0; i < 4; ++i) {
        out[i] = static_cast<char>(bits & 0xFFu);
        bits >>= 8;
    }
}

// Floor division for a possibly negative numerator and a positive divisor.
long long floor_div(long long num, long long den) {
    long long q = num / den;
    if ((num % den != 0) && (num < 0)) --q;
    return q;
}

// Index of the input cell whose center is nearest to output cell `i`, ties to
// the lower index. Output center in input index units is
// ((2i+1)*in - out) / (2*out); nearest-with-lower-tie is ceil(x - 1/2).
std::size_t nearest_source(std::size_t i, std::size_t in, std::size_t out) {
    const long long num = static_cast<long long>(2 * i + 1) * static_cast<long long>(in) -
                          2 * static_cast<long long>(out);
    const long long den = 2 * static_cast<long long>(out);
    long long idx = -floor_div(-num, den);
    idx = std::clamp<long long>(idx, 0, static_cast<long long>(in) - 1);
    return static_cast<std::size_t>(idx);
}

GridRegistration registration_from_json(const json& j) {
    GridRegistration reg;
    reg.lat0 = j.value("lat0", reg.lat0);
    reg.lon0 = j.value("lon0", reg.lon0);
    reg.dlat = j.value("dlat", reg.dlat);
    reg.dlon = j.value("dlon", reg.dlon);
    reg.cell_km = j.value("cell_km", reg.cell_km);
    return reg;
}

ChangeGrid load_raw_json(const fs::path& given) {
    fs::path sidecar = given;
    const auto ext = lower_ext(given);
    if (ext != ".json") sidecar.replace_extension(".json");
    if (!fs::exists(sidecar)) {
        fail(ErrorCode::IoError, "grid sidecar not found: " + sidecar.string(),
             "pass the .json sidecar or a payload with a sibling .json");
    }
    json meta;
    try {
        std::ifstream in(sidecar);
        in >> meta;
    } catch (const json::exception& e) {
        fail(ErrorCode::MalformedHeader, "invalid JSON in " + sidecar.string() + ": " + e.what());
    }
    if (!meta.contains("rows") || !meta.contains("cols")) {
        fail(ErrorCode::MalformedHeader, "sidecar lacks rows/cols: " + sidecar.string());
    }
    const auto rows = meta["rows"].get<std::size_t>();
    const auto cols = meta["cols"].get<std::size_t>();
    const fs::path dir = sidecar.parent_path();

    fs::path payload;
    if (meta.contains("payload_path")) {
        payload = dir / meta["payload_path"].get<std::string>();
    } else if (ext != ".json") {
        payload = given;
    } else {
        payload = sidecar;
        payload.replace_extension(".raw");
    }
    const auto bytes = read_bytes(payload);
    if (bytes.size() != rows * cols * 4) {
        std::ostringstream os;
        os << "header declares " << rows << "x" << cols << " (" << rows * cols
           << " values) but payload " << payload.string() << " holds " << bytes.size() / 4.0
           << " float32 values";
        fail(ErrorCode::MalformedHeader, os.str(), "regenerate the sidecar or payload");
    }
    std::vector<double> values(rows * cols);
    for (std::size_t i = 0; i < values.size(); ++i) values[i] = decode_f32_le(bytes.data() + 4 * i);

    std::vector<std::uint8_t> valid(rows * cols, 1);
    if (meta.contains("mask_path") && !meta["mask_path"].is_null()) {
        const auto mbytes = read_bytes(dir / meta["mask_path"].get<std::string>());
        if (mbytes.size() != rows * cols) {
            fail(ErrorCode::MalformedHeader, "mask holds " + std::to_string(mbytes.size()) +
                                                 " bytes, expected " +
                                                 std::to_string(rows * cols));
        }
        for (std::size_t i = 0; i < valid.size(); ++i) valid[i] = mbytes[i] != 0 ? 1 : 0;
    }
    return ChangeGrid(rows, cols, std::move(values), std::move(valid),
                      registration_from_json(meta));
}

ChangeGrid load_csv(const fs::path& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::IoError, "cannot open " + path.string(), "check the input path");
    std::string line;
    if (!std::getline(in, line)) fail(ErrorCode::MalformedHeader, "empty CSV " + path.string());
    if (!line.empty() && line.back() == '\r') line.pop_back();
    bool has_valid = false;
    if (line == "row,col,value,valid") {
        has_valid = true;
    } else if (line != "row,col,value") {
        fail(ErrorCode::MalformedHeader, "CSV header must be row,col,value[,valid], got '" + line + "'");
    }

    struct Cell {
        double value;
        bool valid;
    };
    std::map<std::pair<std::size_t, std::size_t>, Cell> cells;
    std::size_t max_r = 0, max_c = 0, lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string f[4];
        int n = 0;
        while (n < 4 && std::getline(ss, f[n], ',')) ++n;
        if (n != (has_valid ? 4 : 3)) {
            fail(ErrorCode::MalformedHeader, "CSV line " + std::to_string(lineno) + " has wrong field count");
        }
        try {
            const auto r = static_cast<std::size_t>(std::stoull(f[0]));
            const auto c = static_cast<std::size_t>(std::stoull(f[1]));
            const double v = std::strtod(f[2].c_str(), nullptr);
            const bool ok = has_valid ? std::stoi(f[3]) != 0 : true;
            if (!cells.emplace(std::pair{r, c}, Cell{v, ok}).second) {
                fail(ErrorCode::MalformedHeader, "duplicate cell on CSV line " + std::to_string(lineno));
            }
            max_r = std::max(max_r, r);
            max_c = std::max(max_c, c);
        } catch (const std::logic_error&) {
            fail(ErrorCode::MalformedHeader, "unparsable CSV line " + std::to_string(lineno));
        }
    }
    if (cells.empty()) fail(ErrorCode::MalformedHeader, "CSV has no cells: " + path.string());
    const std::size_t rows = max_r + 1, cols = max_c + 1;
    std::vector<double> values(rows * cols, 0.0);
    std::vector<std::uint8_t> valid(rows * cols, 0);
    for (const auto& [rc, cell] : cells) {
        const auto i = rc.first * cols + rc.second;
        values[i] = cell.value;
        valid[i] = cell.valid ? 1 : 0;
    }
    return ChangeGrid(rows, cols, std::move(values), std::move(valid),
                      GridRegistration::quarter_degree());
}

}  // namespace

void GridRegistration::validate() const {
    if (!(dlat > 0) || !(dlon > 0) || !(cell_km > 0)) {
        fail(ErrorCode::MalformedHeader, "registration requires dlat, dlon, cell_km > 0");
    }
    if (!std::isfinite(lat0) || !std::isfinite(lon0)) {
        fail(ErrorCode::MalformedHeader, "registration origin must be finite");
    }
}

RegionWindow RegionWindow::parse(const std::string& text) {
    std::size_t r0, r1, c0, c1;
    char a, b, c;
    std::istringstream is(text);
    if (!(is >> r0 >> a >> r1 >> b >> c0 >> c >> c1) || a != ':' || b != ',' || c != ':') {
        throw Error(module::grid_core, ErrorCode::InvalidArgument,
                    "window must look like r0:r1,c0:c1, got '" + text + "'");
    }
    if (r0 > r1 || c0 > c1) {
        throw Error(module::grid_core, ErrorCode::WindowOutOfBounds,
                    "window bounds are reversed: " + text);
    }
    return {r0, r1, c0, c1};
}

std::string RegionWindow::to_string() const {
    return std::to_string(row_min) + ":" + std::to_string(row_max) + "," +
           std::to_string(col_min) + ":" + std::to_string(col_max);
}

ChangeGrid::ChangeGrid(std::size_t rows, std::size_t cols, std::vector<double> values,
                       std::vector<std::uint8_t> valid, GridRegistration registration)
    : rows_(rows),
      cols_(cols),
      values_(std::move(values)),
      valid_(std::move(valid)),
      registration_(registration) {
    if (rows_ == 0 || cols_ == 0) fail(ErrorCode::MalformedHeader, "grid dimensions must be positive");
    if (values_.size() != rows_ * cols_ || valid_.size() != rows_ * cols_) {
        fail(ErrorCode::MalformedHeader,
             "grid payload size does not match " + std::to_string(rows_) + "x" + std::to_string(cols_));
    }
    registration_.validate();
    for (std::size_t i = 0; i < values_.size(); ++i) {
        if (valid_[i] && !std::isfinite(values_[i])) {
            fail(ErrorCode::NonFiniteValue,
                 "non-finite value at valid cell (" + std::to_string(i / cols_) + "," +
                     std::to_string(i % cols_) + ")",
                 "mark the cell invalid in the mask or repair the payload");
        }
        if (!valid_[i] && !std::isfinite(values_[i])) values_[i] = 0.0;
    }
}

ChangeGrid::ChangeGrid(std::size_t rows, std::size_t cols, std::vector<double> values,
                       GridRegistration registration)
    : ChangeGrid(rows, cols, std::move(values), std::vector<std::uint8_t>(rows * cols, 1),
                 registration) {}

RegionWindow ChangeGrid::full_window() const { return {0, rows_ - 1, 0, cols_ - 1}; }

GridFormat parse_grid_format(const std::string& name) {
    if (name == "raw+json" || name == "raw" || name == "A") return GridFormat::RawJson;
    if (name == "csv" || name == "B") return GridFormat::Csv;
    if (name == "auto") return GridFormat::Auto;
    throw Error(module::grid_core, ErrorCode::InvalidArgument, "unknown grid format '" + name + "'");
}

ChangeGrid load_grid(const fs::path& path, GridFormat format) {
    if (format == GridFormat::Auto) {
        format = lower_ext(path) == ".csv" ? GridFormat::Csv : GridFormat::RawJson;
    }
    if (format == GridFormat::Csv) return load_csv(path);
    return load_raw_json(path);
}

void save_grid(const ChangeGrid& grid, const fs::path& path, GridFormat format) {
    if (format == GridFormat::Auto) {
        format = lower_ext(path) == ".csv" ? GridFormat::Csv : GridFormat::RawJson;
    }
    if (!path.parent_path().empty()) fs::create_directories(path.parent_path());
    auto open = [](const fs::path& p, std::ios::openmode mode) {
        std::ofstream out(p, mode);
        if (!out) fail(ErrorCode::IoError, "cannot write " + p.string());
        return out;
    };

    if (format == GridFormat::Csv) {
        auto out = open(path, std::ios::out);
        out << "row,col,value,valid\n";
        out.precision(17);
        for (std::size_t r = 0; r < grid.rows(); ++r)
            for (std::size_t c = 0; c < grid.cols(); ++c)
                out << r << ',' << c << ',' << grid.value(r, c) << ',' << (grid.valid(r, c) ? 1 : 0)
                    << '\n';
        return;
    }

    fs::path sidecar = path, payload = path, mask = path;
    sidecar.replace_extension(".json");
    payload.replace_extension(".raw");
    mask.replace_extension(".mask");

    std::vector<char> bytes(grid.size() * 4);
    for (std::size_t i = 0; i < grid.size(); ++i)
        encode_f32_le(static_cast<float>(grid.values()[i]), bytes.data() + 4 * i);
    open(payload, std::ios::binary).write(bytes.data(), static_cast<std::streamsize>(bytes.size()));

    const auto& reg = grid.registration();
    json meta = {{"rows", grid.rows()}, {"cols", grid.cols()}, {"lat0", reg.lat0},
                 {"lon0", reg.lon0},    {"dlat", reg.dlat},    {"dlon", reg.dlon},
                 {"cell_km", reg.cell_km}, {"payload_path", payload.filename().string()}};
    const bool any_invalid =
        std::any_of(grid.valid_mask().begin(), grid.valid_mask().end(), [](auto v) { return v == 0; });
    if (any_invalid) {
        open(mask, std::ios::binary)
            .write(reinterpret_cast<const char*>(grid.valid_mask().data()),
                   static_cast<std::streamsize>(grid.size()));
        meta["mask_path"] = mask.filename().string();
    }
    open(sidecar, std::ios::out) << meta.dump(2) << '\n';
}

ChangeGrid resample_nearest(const ChangeGrid& grid, std::size_t target_rows, std::size_t target_cols) {
    if (target_rows == 0 || target_cols == 0) {
        fail(ErrorCode::InvalidArgument, "resample target dimensions must be >= 1");
    }
    std::vector<std::size_t> row_src(target_rows), col_src(target_cols);
    for (std::size_t r = 0; r < target_rows; ++r) row_src[r] = nearest_source(r, grid.rows(), target_rows);
    for (std::size_t c = 0; c < target_cols; ++c) col_src[c] = nearest_source(c, grid.cols(), target_cols);

    std::vector<double> values(target_rows * target_cols);
    std::vector<std::uint8_t> valid(target_rows * target_cols);
    for (std::size_t r = 0; r < target_rows; ++r) {
        for (std::size_t c = 0; c < target_cols; ++c) {
            const auto src = grid.index(row_src[r], col_src[c]);
            values[r * target_cols + c] = grid.values()[src];
            valid[r * target_cols + c] = grid.valid_mask()[src];
        }
    }

    // Keep the outer cell edges fixed.
    const auto& in = grid.registration();
    GridRegistration out = in;
    const double row_scale = static_cast<double>(grid.rows()) / static_cast<double>(target_rows);
    const double col_scale = static_cast<double>(grid.cols()) / static_cast<double>(target_cols);
    out.dlat = in.dlat * row_scale;
    out.dlon = in.dlon * col_scale;
    out.lat0 = in.lat0 - 0.5 * in.dlat + 0.5 * out.dlat;
    out.lon0 = in.lon0 - 0.5 * in.dlon + 0.5 * out.dlon;
    out.cell_km = in.cell_km * row_scale;
    if (target_rows == grid.rows() && target_cols == grid.cols()) out = in;
    return ChangeGrid(target_rows, target_cols, std::move(values), std::move(valid), out);
}

void check_window(const ChangeGrid& grid, const RegionWindow& w) {
    if (w.row_min > w.row_max || w.col_min > w.col_max || w.row_max >= grid.rows() ||
        w.col_max >= grid.cols()) {
        fail(ErrorCode::WindowOutOfBounds,
             "window " + w.to_string() + " does not fit a " + std::to_string(grid.rows()) + "x" +
                 std::to_string(grid.cols()) + " grid",
             "window bounds are inclusive and zero-based");
    }
}

ChangeGrid crop_region(const ChangeGrid& grid, const RegionWindow& w) {
    check_window(grid, w);
    std::vector<double> values;
    std::vector<std::uint8_t> valid;
    values.reserve(w.rows() * w.cols());
    valid.reserve(w.rows() * w.cols());
    for (std::size_t r = w.row_min; r <= w.row_max; ++r) {
        for (std::size_t c = w.col_min; c <= w.col_max; ++c) {
            values.push_back(grid.value(r, c));
            valid.push_back(grid.valid_mask()[grid.index(r, c)]);
        }
    }
    GridRegistration reg = grid.registration();
    reg.lat0 = grid.registration().latitude(static_cast<double>(w.row_min));
    reg.lon0 = grid.registration().longitude(static_cast<double>(w.col_min));
    return ChangeGrid(w.rows(), w.cols(), std::move(values), std::move(valid), reg);
}

ChangeGrid diff_grids(const ChangeGrid& a, const ChangeGrid& b) {
    if (!a.same_shape(b) || !(a.registration() == b.registration())) {
        throw Error(module::io_cli, ErrorCode::DimMismatch,
                    "cannot difference grids of different shape or registration",
                    "resample both snapshots to the same grid first");
    }
    std::vector<double> values(a.size());
    std::vector<std::uint8_t> valid(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        valid[i] = (a.valid_mask()[i] && b.valid_mask()[i]) ? 1 : 0;
        values[i] = valid[i] ? b.values()[i] - a.values()[i] : 0.0;
    }
    return ChangeGrid(a.rows(), a.cols(), std::move(values), std::move(valid), a.registration());
}

}  // namespace spatial_link
