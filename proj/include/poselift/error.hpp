#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace poselift {

/// Base class for every error raised by the engine.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input text. `line()` is 1-based, 0 when not line oriented.
class ParseError : public Error {
public:
    ParseError(const std::string& source, std::size_t line, const std::string& what)
        : Error(source + (line ? ":" + std::to_string(line) : std::string()) + ": " + what),
          line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// A domain invariant does not hold. The message names the offending type/field.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// No valid depth pixel inside the region a measurement was asked for.
class EmptySupport : public Error {
public:
    using Error::Error;
};

/// Frames fed to the tracker out of order.
class SequencingError : public Error {
public:
    using Error::Error;
};

/// Registry lookup with a name that was never registered.
class UnknownName : public Error {
public:
    using Error::Error;
};

class ScenarioError : public Error {
public:
    using Error::Error;
};

}  // namespace poselift
