#include "retro/error.hpp"

namespace retro {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::NegativeMass: return "NegativeMass";
        case ErrorCode::NotNormalized: return "NotNormalized";
        case ErrorCode::NotSquare: return "NotSquare";
        case ErrorCode::NotInvariant: return "NotInvariant";
        case ErrorCode::EmptySupport: return "EmptySupport";
        case ErrorCode::AlphabetMismatch: return "AlphabetMismatch";
        case ErrorCode::PriorOutsideSupport: return "PriorOutsideSupport";
        case ErrorCode::SupportMismatch: return "SupportMismatch";
        case ErrorCode::ZeroParameter: return "ZeroParameter";
        case ErrorCode::NonInvertibleCustom: return "NonInvertibleCustom";
        case ErrorCode::DomainError: return "DomainError";
        case ErrorCode::MissingReverseAtom: return "MissingReverseAtom";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::NotHermitian: return "NotHermitian";
        case ErrorCode::NotPositive: return "NotPositive";
        case ErrorCode::SingularReference: return "SingularReference";
        case ErrorCode::NotCPTP: return "NotCPTP";
        case ErrorCode::ZeroOutcomeWeight: return "ZeroOutcomeWeight";
        case ErrorCode::NotBijective: return "NotBijective";
        case ErrorCode::EmptyShell: return "EmptyShell";
        case ErrorCode::NonUniqueSteadyState: return "NonUniqueSteadyState";
        case ErrorCode::SingularSteadyState: return "SingularSteadyState";
        case ErrorCode::ParseError: return "ParseError";
        case ErrorCode::SchemaError: return "SchemaError";
        case ErrorCode::VersionError: return "VersionError";
        case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

}  // namespace retro
