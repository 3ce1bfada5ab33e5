#pragma once

#include <stdexcept>
#include <string>

namespace qlcp {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A series or window is too short for the requested computation.
class SizingError : public Error {
public:
    using Error::Error;
};

/// A parameter vector lies outside the model's parameter domain.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Vector or matrix dimensions disagree with the model.
class ShapeError : public Error {
public:
    using Error::Error;
};

/// A time index falls outside the segment it was applied to.
class IndexError : public Error {
public:
    using Error::Error;
};

/// No critical value is available for the requested (d, alpha).
class CalibrationRequired : public Error {
public:
    using Error::Error;
};

/// Malformed input file. Carries the 1-based line number when known.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line = 0)
        : Error(line ? what + " (line " + std::to_string(line) + ")" : what), line_(line) {}

    [[nodiscard]] std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Invalid configuration or plan.
class ValidationError : public Error {
public:
    using Error::Error;
};

} // namespace qlcp
