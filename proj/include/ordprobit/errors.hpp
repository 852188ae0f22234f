#pragma once

#include <stdexcept>
#include <string>

namespace ordprobit {

// Invalid mathematical domain (bad interval, bad scale, ...).
struct DomainError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct DimensionMismatch : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct CategoryOutOfRange : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct NonFiniteInput : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct UnorderedThresholds : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// A matrix required to be SPD has a non-positive Cholesky pivot.
struct NotPositiveDefinite : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Sherman-Morrison denominator vanished; the rank-one update is degenerate.
struct SingularUpdate : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Some leverage x_i' V x_i reached 1, so the PMF site scale is undefined.
struct DegenerateLeverage : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Threshold estimation requires every category to be observed.
struct EmptyCategory : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// A constant nonzero column is confounded with the thresholds.
struct IdentifiabilityError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct InsufficientSamples : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Simulated cutoffs left a category empty after all retries.
struct DegenerateCutoffs : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace ordprobit
