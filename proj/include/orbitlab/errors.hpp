#pragma once

#include <stdexcept>
#include <string>

namespace orbitlab {

// Thrown when a digit stream is too short for the requested materialization.
struct InsufficientDigits : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Map applied outside its domain (e.g. the Gauss map at 0).
struct DomainError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A computation was pushed past the depth validated for 128-bit inputs.
struct PrecisionExhausted : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A sequence required to be monotone was not.
struct NotMonotone : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Regression input carries no usable spread.
struct DegenerateFit : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A sampled orbit collapsed (periodic seed); callers resample.
struct DegenerateOrbit : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace orbitlab
