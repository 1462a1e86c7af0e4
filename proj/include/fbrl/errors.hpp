#pragma once

#include <stdexcept>
#include <string>

namespace fbrl {

/// Two partial policies whose active intervals cannot be joined.
struct IntervalError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// A policy was queried at a horizon or state it does not cover.
struct PolicyDomainError : std::out_of_range {
    using std::out_of_range::out_of_range;
};

/// Malformed or truncated serialized input.
struct LoadError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Invalid experiment or construction parameters.
struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// An optimizer produced a non-finite loss.
struct DivergedError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Failure inside one phase of a pipeline; the message carries the phase tag.
struct PhaseError : std::runtime_error {
    PhaseError(std::string phase, const std::string& what) : std::runtime_error(phase + " phase: " + what), phase(std::move(phase)) {}
    std::string phase;
};

} // namespace fbrl
