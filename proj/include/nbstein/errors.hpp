#pragma once

#include <stdexcept>
#include <string>

namespace nbstein {

// Base class for all domain errors raised by the library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A parameter left its admissible range (probability outside (0,1), alpha <= 0, ...).
struct InvalidParams : Error {
    using Error::Error;
};

// The eta machinery for the three-parameter fit produced no usable real root.
struct InadmissibleEta : Error {
    using Error::Error;
};

// Two- and three-parameter matching need sigma^2 > mu.
struct OverdispersedRequired : Error {
    using Error::Error;
};

// A perturbation-style denominator (alpha*q - delta1, r*q - delta) is non-positive.
struct PerturbationTooLarge : Error {
    using Error::Error;
};

// The mixture's component kinds match none of the closed-form bound families.
struct UnsupportedComposition : Error {
    using Error::Error;
};

// A truncated series shows no decay at the truncation point.
struct NonDecayingSeries : Error {
    using Error::Error;
};

// An exact total-variation distance exceeded its reported bound.
struct DominationViolated : Error {
    using Error::Error;
};

// Malformed input configuration (CLI / JSON).
struct SchemaError : Error {
    using Error::Error;
};

} // namespace nbstein
