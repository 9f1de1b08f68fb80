#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace brb {

enum class ErrorCode {
    InvalidInput,          // malformed or unknown input binding
    Schema,                // structurally broken rule base / document
    KbInvalid,             // rule base failed validation
    NoRuleActivated,       // every rule has zero combined matching degree
    AggregationDegenerate, // ER normalisation collapsed
    DegenerateLabels,      // ROC/AUC with a single class
    NotFound,              // missing store version, missing column
    GridTooLarge,          // initial rule base would exceed the grid limit
    Io,
};

constexpr std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::InvalidInput: return "InvalidInput";
        case ErrorCode::Schema: return "Schema";
        case ErrorCode::KbInvalid: return "KbInvalid";
        case ErrorCode::NoRuleActivated: return "NoRuleActivated";
        case ErrorCode::AggregationDegenerate: return "AggregationDegenerate";
        case ErrorCode::DegenerateLabels: return "DegenerateLabels";
        case ErrorCode::NotFound: return "NotFound";
        case ErrorCode::GridTooLarge: return "GridTooLarge";
        case ErrorCode::Io: return "Io";
    }
    return "Unknown";
}

/// Exception carrying a machine-readable code and, optionally, the path of the
/// offending element (e.g. "inputs.LandType" or "rules[3].beliefs").
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message, std::string location = {})
        : std::runtime_error(message), code_(code), location_(std::move(location)) {}

    ErrorCode code() const noexcept { return code_; }
    const std::string& location() const noexcept { return location_; }

private:
    ErrorCode code_;
    std::string location_;
};

} // namespace brb
