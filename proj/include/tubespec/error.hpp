#pragma once

#include <stdexcept>
#include <string>

namespace tubespec {

enum class ErrorCode {
    NonPositiveAlpha,
    NegativeParameter,
    BetaOutOfRange,
    NonFiniteParameter,
    ExcludedPoint,
    NoConvergence,
    ConfluentBasis,
    NotAnEigenvalue,
    RootOnContour,
    DepthCapExceeded,
    ResolutionTooLow,
    SolverFailure,
    DegreeOverflow,
    DomainViolation,
    SingularSystem,
    InsufficientData,
    PreconditionViolation,
    ConfigError,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}
    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

// Raised for malformed configuration files and invalid parameter sets.
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error(ErrorCode::ConfigError, what) {}
};

}  // namespace tubespec
