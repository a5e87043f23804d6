#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace spatial_link {

enum class ErrorCode {
    MalformedHeader,
    NonFiniteValue,
    WindowOutOfBounds,
    InsufficientData,
    DimMismatch,
    DuplicatePoint,
    MaskDimMismatch,
    EmptySide,
    PathExplosion,
    StationUnreachable,
    ChainViolation,
    InvalidArgument,
    IoError,
};

std::string_view to_string(ErrorCode code) noexcept;

// Every failure raised by the library carries the module that raised it and a
// short remediation hint, so the CLI can report both without string parsing.
class Error : public std::runtime_error {
public:
    Error(std::string module, ErrorCode code, const std::string& message,
          std::string hint = {})
        : std::runtime_error(message),
          module_(std::move(module)),
          code_(code),
          hint_(std::move(hint)) {}

    const std::string& module() const noexcept { return module_; }
    ErrorCode code() const noexcept { return code_; }
    const std::string& hint() const noexcept { return hint_; }

private:
    std::string module_;
    ErrorCode code_;
    std::string hint_;
};

namespace module {
inline constexpr const char* grid_core = "grid-core";
inline constexpr const char* spatial_graph = "spatial-graph";
inline constexpr const char* path_extraction = "path-extraction";
inline constexpr const char* significance = "significance";
inline constexpr const char* aar_benchmark = "aar-benchmark";
inline constexpr const char* synthetic = "synthetic";
inline constexpr const char* io_cli = "io-cli";
}  // namespace module

}  // namespace spatial_link
