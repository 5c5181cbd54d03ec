#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hpcpred {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input text. Carries the 1-based line number when known.
class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& what)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

    [[nodiscard]] std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Invalid or missing configuration (system size, parameter out of range, ...).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// A predictor was asked for a prediction without any usable history.
class ColdStartError : public Error {
public:
    using Error::Error;
};

/// A precondition on the arguments of an operation was violated.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

} // namespace hpcpred
