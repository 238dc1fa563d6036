#pragma once

#include <stdexcept>
#include <string>

namespace hypfpp {

// Error taxonomy mirrored by the CLI exit codes: config/format problems exit
// 3, resource/budget exhaustion exits 4, gate failures (not exceptions) exit 2.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad user input: config files, automaton files, malformed element syntax.
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& msg) : Error(msg) {}
};

// Automaton file violates the documented format (nondeterminism, unknown
// labels, unreachable states). A species of config error for exit purposes.
class FormatError : public ConfigError {
public:
    explicit FormatError(const std::string& msg) : ConfigError(msg) {}
};

// Operation misuse: preconditions violated (k not a multiple of d, element
// outside the working ball, truncation bounds inverted, ...).
class DomainError : public Error {
public:
    explicit DomainError(const std::string& msg) : Error(msg) {}
};

// A configured budget or cap was exhausted (ball cap, relaxation budget).
class ResourceError : public Error {
public:
    explicit ResourceError(const std::string& msg) : Error(msg) {}
};

// Iterative numerics failed to converge within the configured cap.
class NumericError : public Error {
public:
    NumericError(const std::string& msg, double residual)
        : Error(msg), residual(residual) {}
    double residual;
};

// Target not reachable inside the query domain; callers must consciously
// widen the domain instead of receiving a silent +infinity.
class UnreachableError : public Error {
public:
    explicit UnreachableError(const std::string& msg) : Error(msg) {}
};

} // namespace hypfpp
