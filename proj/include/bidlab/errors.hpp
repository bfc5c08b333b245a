#pragma once

#include <stdexcept>
#include <string>

namespace bidlab {

enum class ErrorCode {
    RobustnessBelowE,
    NoSignChange,
    ConsistencyOutOfRange,
    ThresholdOutOfRange,
    InsufficientSamples,
    DivergentTail,
    NonConvergence,
    FeasibilityViolation,
    NumericOverflow,
    IoError,
    ParseError,
    Disconnected,
    NonpositiveWeight,
    MissingBaseline,
};

inline const char* error_code_name(ErrorCode c) {
    switch (c) {
        case ErrorCode::RobustnessBelowE: return "ROBUSTNESS_BELOW_E";
        case ErrorCode::NoSignChange: return "NO_SIGN_CHANGE";
        case ErrorCode::ConsistencyOutOfRange: return "CONSISTENCY_OUT_OF_RANGE";
        case ErrorCode::ThresholdOutOfRange: return "THRESHOLD_OUT_OF_RANGE";
        case ErrorCode::InsufficientSamples: return "INSUFFICIENT_SAMPLES";
        case ErrorCode::DivergentTail: return "DIVERGENT_TAIL";
        case ErrorCode::NonConvergence: return "NON_CONVERGENCE";
        case ErrorCode::FeasibilityViolation: return "FEASIBILITY_VIOLATION";
        case ErrorCode::NumericOverflow: return "NUMERIC_OVERFLOW";
        case ErrorCode::IoError: return "IO_ERROR";
        case ErrorCode::ParseError: return "PARSE_ERROR";
        case ErrorCode::Disconnected: return "DISCONNECTED";
        case ErrorCode::NonpositiveWeight: return "NONPOSITIVE_WEIGHT";
        case ErrorCode::MissingBaseline: return "MISSING_BASELINE";
    }
    return "UNKNOWN";
}

/// Exception carrying a machine-readable error code. The CLI maps the code
/// to a stable identifier on stderr and a nonzero exit status.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& msg)
        : std::runtime_error(std::string(error_code_name(code)) + ": " + msg), code_(code) {}

    ErrorCode code() const { return code_; }

private:
    ErrorCode code_;
};

}  // namespace bidlab
