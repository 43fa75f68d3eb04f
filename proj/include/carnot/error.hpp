#pragma once

#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>

namespace carnot {

enum class Errc {
    NotSkew,
    JNotInjective,
    NotBracketGenerating,
    DimensionLimit,
    DimensionMismatch,
    InvalidArgument,
    NumericFailure,
    AccuracyError,
    NotHType,
    Unbounded,
    BudgetExhausted,
    FieldNotAdmissible,
    InsufficientCurve,
    TooFewGridPoints,
    Unsupported,
    ConfigError,
};

constexpr std::string_view to_string(Errc code) {
    switch (code) {
    case Errc::NotSkew: return "NotSkew";
    case Errc::JNotInjective: return "JNotInjective";
    case Errc::NotBracketGenerating: return "NotBracketGenerating";
    case Errc::DimensionLimit: return "DimensionLimit";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::NumericFailure: return "NumericFailure";
    case Errc::AccuracyError: return "AccuracyError";
    case Errc::NotHType: return "NotHType";
    case Errc::Unbounded: return "Unbounded";
    case Errc::BudgetExhausted: return "BudgetExhausted";
    case Errc::FieldNotAdmissible: return "FieldNotAdmissible";
    case Errc::InsufficientCurve: return "InsufficientCurve";
    case Errc::TooFewGridPoints: return "TooFewGridPoints";
    case Errc::Unsupported: return "Unsupported";
    case Errc::ConfigError: return "ConfigError";
    }
    return "Unknown";
}

/// Every failure raised by the library. `estimate()` carries the offending
/// error estimate for AccuracyError / BudgetExhausted, NaN otherwise.
class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what, double estimate = std::numeric_limits<double>::quiet_NaN())
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code), estimate_(estimate) {}

    Errc code() const noexcept { return code_; }
    double estimate() const noexcept { return estimate_; }

private:
    Errc code_;
    double estimate_;
};

inline void require(bool condition, Errc code, const std::string& what) {
    if (!condition) throw Error(code, what);
}

} // namespace carnot
