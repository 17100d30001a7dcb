#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace trajtree {

/// Base class for every error raised by the library. The CLI maps the
/// concrete subclasses onto process exit codes.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad configuration or usage (exit code 1).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Malformed or inconsistent input data (exit code 2).
class InputError : public Error {
public:
    using Error::Error;

    /// Attaches a 1-based line number to the message.
    InputError(std::size_t line, const std::string& what);

    /// 0 when the error is not tied to a particular input line.
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_ = 0;
};

/// A broken internal invariant: oracle mismatch, conservation failure
/// (exit code 3).
class InvariantError : public Error {
public:
    using Error::Error;
};

}  // namespace trajtree
