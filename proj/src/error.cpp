#include "spatial_link/error.hpp"

namespace spatial_link {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::MalformedHeader: return "MalformedHeader";
        case ErrorCode::NonFiniteValue: return "NonFiniteValue";
        case ErrorCode::WindowOutOfBounds: return "WindowOutOfBounds";
        case ErrorCode::InsufficientData: return "InsufficientData";
        case ErrorCode::DimMismatch: return "DimMismatch";
        case ErrorCode::DuplicatePoint: return "DuplicatePoint";
        case ErrorCode::MaskDimMismatch: return "MaskDimMismatch";
        case ErrorCode::EmptySide: return "EmptySide";
        case ErrorCode::PathExplosion: return "PathExplosion";
        case ErrorCode::StationUnreachable: return "StationUnreachable";
        case ErrorCode::ChainViolation: return "ChainViolation";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

}  // namespace spatial_link
