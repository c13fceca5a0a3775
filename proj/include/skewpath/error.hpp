#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace skewpath {

/// Malformed text input. Carries the 1-based line number when known (0 otherwise).
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t line)
        : std::runtime_error(line == 0 ? what : "line " + std::to_string(line) + ": " + what),
          line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// A rho equation with no root in [0, 1].
class InfeasibleError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Corrupt, truncated or version-mismatched index file.
class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace skewpath
