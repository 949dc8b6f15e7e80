#include "rankprune/errors.hpp"

namespace rankprune {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::InvalidRates: return "InvalidRates";
        case ErrorCode::SingleClassInput: return "SingleClassInput";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::TooFewExamples: return "TooFewExamples";
        case ErrorCode::EmptyClass: return "EmptyClass";
        case ErrorCode::DegenerateCounts: return "DegenerateCounts";
        case ErrorCode::RankOutOfRange: return "RankOutOfRange";
        case ErrorCode::OverPrune: return "OverPrune";
        case ErrorCode::MissingHiddenLabels: return "MissingHiddenLabels";
        case ErrorCode::LengthMismatch: return "LengthMismatch";
        case ErrorCode::BadMagic: return "BadMagic";
        case ErrorCode::TruncatedFile: return "TruncatedFile";
        case ErrorCode::ParseError: return "ParseError";
        case ErrorCode::IoError: return "IoError";
        case ErrorCode::ConfigError: return "ConfigError";
        case ErrorCode::InfeasibleConfig: return "InfeasibleConfig";
    }
    return "Unknown";
}

}  // namespace rankprune
