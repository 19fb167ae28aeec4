#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cyclecast {

/// Matrix/vector dimensions do not agree.
struct ShapeError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// An operation that needs data received none.
struct EmptyInput : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Rejection sampling could not produce a value inside the configured bounds.
struct DistributionInfeasible : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A series is too short for the requested operation.
struct InsufficientHistory : std::runtime_error {
    std::size_t required_minimum;

    InsufficientHistory(const std::string& msg, std::size_t required)
        : std::runtime_error(msg), required_minimum(required) {}
};

/// The regression design matrix is rank deficient.
struct SingularDesign : std::runtime_error {
    int column;  // offending input column, -1 when it is the intercept

    SingularDesign(const std::string& msg, int offending_column)
        : std::runtime_error(msg), column(offending_column) {}
};

/// Training produced a non-finite loss.
struct TrainingDiverged : std::runtime_error {
    int epoch;

    TrainingDiverged(const std::string& msg, int at_epoch)
        : std::runtime_error(msg), epoch(at_epoch) {}
};

/// A file could not be read or written.
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A CSV input did not match its expected format.
struct CsvParseError : std::invalid_argument {
    std::size_t row;      // 0 = header
    std::string column;

    CsvParseError(const std::string& msg, std::size_t at_row, std::string at_column)
        : std::invalid_argument(msg), row(at_row), column(std::move(at_column)) {}
};

}  // namespace cyclecast
