#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace retro {

enum class ErrorCode {
    InvalidArgument,
    NegativeMass,
    NotNormalized,
    NotSquare,
    NotInvariant,
    EmptySupport,
    AlphabetMismatch,
    PriorOutsideSupport,
    SupportMismatch,
    ZeroParameter,
    NonInvertibleCustom,
    DomainError,
    MissingReverseAtom,
    DimensionMismatch,
    NotHermitian,
    NotPositive,
    SingularReference,
    NotCPTP,
    ZeroOutcomeWeight,
    NotBijective,
    EmptyShell,
    NonUniqueSteadyState,
    SingularSteadyState,
    ParseError,
    SchemaError,
    VersionError,
    IoError,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code), detail_(message) {}

    ErrorCode code() const noexcept { return code_; }
    /// The message without the code prefix.
    const std::string& detail() const noexcept { return detail_; }

private:
    ErrorCode code_;
    std::string detail_;
};

// Default tolerances. Every operation that uses one accepts an override.
inline constexpr double kTolNorm = 1e-12;
inline constexpr double kTolFix = 1e-10;
inline constexpr double kMergeTol = 1e-9;

}  // namespace retro
