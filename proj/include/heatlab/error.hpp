#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace heatlab {

enum class ErrorCode {
    NonPositiveMeasure,
    InvalidCombination,
    InvalidArgument,
    LengthMismatch,
    ConvergenceFailure,
    LinearSolveFailure,
    EmptySamples,
    DegenerateCylinder,
    EmptySet,
    SchemaViolation,
};

std::string_view to_string(ErrorCode code);

/// Raised for violated preconditions and numerical failures. Soft outcomes
/// (clipped balls, divergent Green's functions) are flags on results instead.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

} // namespace heatlab
