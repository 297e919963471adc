#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace eforensics {

/// Failure categories surfaced by the library. Each maps to one exit-code class in the CLI.
enum class ErrorKind {
    malformed_row,
    missing_column,
    duplicate_station,
    empty_after_cleaning,
    zero_valid_votes,
    no_second_digit,
    degenerate_station,
    k_out_of_range,
    no_outliers,
    config_invalid,
    mismatched_pair,
    incompatible_range,
    io_error,
};

constexpr std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::malformed_row: return "MalformedRow";
        case ErrorKind::missing_column: return "MissingColumn";
        case ErrorKind::duplicate_station: return "DuplicateStation";
        case ErrorKind::empty_after_cleaning: return "EmptyAfterCleaning";
        case ErrorKind::zero_valid_votes: return "ZeroValidVotes";
        case ErrorKind::no_second_digit: return "NoSecondDigit";
        case ErrorKind::degenerate_station: return "DegenerateStation";
        case ErrorKind::k_out_of_range: return "KOutOfRange";
        case ErrorKind::no_outliers: return "NoOutliers";
        case ErrorKind::config_invalid: return "ConfigInvalid";
        case ErrorKind::mismatched_pair: return "MismatchedPair";
        case ErrorKind::incompatible_range: return "IncompatibleRange";
        case ErrorKind::io_error: return "IOError";
    }
    return "Unknown";
}

class forensics_error : public std::runtime_error {
public:
    forensics_error(ErrorKind kind, const std::string &message)
        : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

    [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

/// Row-level parse failure; `line` is 1-based and counts the header.
class malformed_row_error : public forensics_error {
public:
    malformed_row_error(std::size_t line, const std::string &reason)
        : forensics_error(ErrorKind::malformed_row, "line " + std::to_string(line) + ": " + reason),
          line_(line), reason_(reason) {}

    [[nodiscard]] std::size_t line() const noexcept { return line_; }
    [[nodiscard]] const std::string &reason() const noexcept { return reason_; }

private:
    std::size_t line_;
    std::string reason_;
};

}  // namespace eforensics
