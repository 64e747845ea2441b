#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace spdsysid {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConvergenceFailure : public Error {
public:
    using Error::Error;
};

class NotPositiveDefinite : public Error {
public:
    using Error::Error;
};

class SingularMatrix : public Error {
public:
    using Error::Error;
};

class SingularTransform : public Error {
public:
    using Error::Error;
};

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

class UnsupportedDimension : public Error {
public:
    using Error::Error;
};

class InvalidSpec : public Error {
public:
    using Error::Error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// CSV / JSON content error. `line()` is 1-based, 0 when not applicable.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line = 0)
        : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
    [[nodiscard]] std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Non-uniform hourly spacing in a forcing series.
class GapError : public ParseError {
public:
    using ParseError::ParseError;
};

class TooShort : public Error {
public:
    using Error::Error;
};

/// Fit aborted on a NaN/inf loss; carries the loss trace up to the failure.
class NonFiniteLoss : public Error {
public:
    NonFiniteLoss(const std::string& what, std::vector<double> trace) : Error(what), trace_(std::move(trace)) {}
    [[nodiscard]] const std::vector<double>& trace() const noexcept { return trace_; }

private:
    std::vector<double> trace_;
};

class EmptyInput : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace spdsysid
