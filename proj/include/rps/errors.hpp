#pragma once

#include <stdexcept>
#include <string>

namespace rps {

// Bad or inconsistent user configuration (unknown keys, misaligned payoff, ...).
// The CLI maps this to exit code 2.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// A model invariant (mass conservation, positivity, ...) failed during or after
// a run. CLI exit code 3.
class InvariantViolation : public std::runtime_error {
public:
    explicit InvariantViolation(const std::string& msg) : std::runtime_error(msg) {}
};

// Unstable time step, NaN/Inf in a solution field, exhausted series. CLI exit code 4.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace rps
