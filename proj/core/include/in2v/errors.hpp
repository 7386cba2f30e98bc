#pragma once

#include <stdexcept>
#include <string>

namespace in2v {

// Malformed input files (edge lists, labels, split JSON, ...).
struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Violated preconditions or invariants on otherwise well-formed data.
struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Degenerate inputs for which the requested quantity is undefined
// (single effective class, empty index set, ...).
struct DegenerateInputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Non-finite losses or activations; usually a too-high learning rate.
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace in2v
