#include "monster/error.hpp"

namespace monster {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DegeneratePoint: return "DegeneratePoint";
    case ErrorCode::SingularHomography: return "SingularHomography";
    case ErrorCode::NonPositiveDepth: return "NonPositiveDepth";
    case ErrorCode::PsiOutOfPhysicalRange: return "PsiOutOfPhysicalRange";
    case ErrorCode::InvalidRange: return "InvalidRange";
    case ErrorCode::ObjectInsideFocalLength: return "ObjectInsideFocalLength";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::InsufficientOverlap: return "InsufficientOverlap";
    case ErrorCode::NonInformativeReference: return "NonInformativeReference";
    case ErrorCode::NoProgress: return "NoProgress";
    case ErrorCode::EmptyManifest: return "EmptyManifest";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

}  // namespace monster
