#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sw {

enum class ErrorCode {
    EmptySupport,
    NegativeWeight,
    DuplicateAtom,
    BadWeights,
    DegenerateWeight,
    NoConvergence,
    Critical,
    Singular,
    BadDimension,
    TooLarge,
    InsufficientData,
    BadF,
    ConfigError,
    IoError,
};

std::string_view to_string(ErrorCode code) noexcept;

// Single exception type for the library; callers branch on code().
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

inline std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::EmptySupport: return "EmptySupport";
        case ErrorCode::NegativeWeight: return "NegativeWeight";
        case ErrorCode::DuplicateAtom: return "DuplicateAtom";
        case ErrorCode::BadWeights: return "BadWeights";
        case ErrorCode::DegenerateWeight: return "DegenerateWeight";
        case ErrorCode::NoConvergence: return "NoConvergence";
        case ErrorCode::Critical: return "Critical";
        case ErrorCode::Singular: return "Singular";
        case ErrorCode::BadDimension: return "BadDimension";
        case ErrorCode::TooLarge: return "TooLarge";
        case ErrorCode::InsufficientData: return "InsufficientData";
        case ErrorCode::BadF: return "BadF";
        case ErrorCode::ConfigError: return "ConfigError";
        case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

}  // namespace sw
