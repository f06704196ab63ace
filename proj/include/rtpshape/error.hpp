#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace rtpshape {

/// Base of every error thrown by the library. The CLI maps IoError to exit
/// status 3 and everything else to 2.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class PreconditionError : public Error {
public:
    using Error::Error;
};

class EmptyTraceError : public Error {
public:
    using Error::Error;
};

class InconsistentInputError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

class InsufficientDataError : public Error {
public:
    InsufficientDataError(std::string metric, const std::string& what)
        : Error(metric + ": " + what), metric_(std::move(metric)) {}

    const std::string& metric() const noexcept { return metric_; }

private:
    std::string metric_;
};

/// Structural problem with a CSV header or line layout.
class FormatError : public Error {
public:
    FormatError(std::size_t line, const std::string& what)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// A field that is not an integer or is out of range. Row and column are 1-based.
class ParseError : public Error {
public:
    ParseError(std::size_t row, std::size_t column, const std::string& what)
        : Error("row " + std::to_string(row) + ", column " + std::to_string(column) + ": " + what),
          row_(row), column_(column) {}

    std::size_t row() const noexcept { return row_; }
    std::size_t column() const noexcept { return column_; }

private:
    std::size_t row_;
    std::size_t column_;
};

class ValidationError : public Error {
public:
    ValidationError(const std::string& what, std::vector<std::string> details)
        : Error(what), details_(std::move(details)) {}

    const std::vector<std::string>& details() const noexcept { return details_; }

private:
    std::vector<std::string> details_;
};

class UnsupportedFormatError : public Error {
public:
    using Error::Error;
};

class UnsupportedLinkError : public Error {
public:
    using Error::Error;
};

class TruncationError : public Error {
public:
    TruncationError(std::size_t record, const std::string& what)
        : Error("record " + std::to_string(record) + ": " + what), record_(record) {}

    std::size_t record() const noexcept { return record_; }

private:
    std::size_t record_;
};

/// Wraps a failure raised inside one pipeline stage.
class StageError : public Error {
public:
    StageError(std::size_t stage, const std::string& what)
        : Error("stage " + std::to_string(stage) + ": " + what), stage_(stage) {}

    std::size_t stage() const noexcept { return stage_; }

private:
    std::size_t stage_;
};

} // namespace rtpshape
