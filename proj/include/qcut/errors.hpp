#pragma once

#include <stdexcept>
#include <string>

namespace qcut {

// Base for every error the library raises on contract violations.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DimensionError : Error {
    using Error::Error;
};

struct IndexError : Error {
    using Error::Error;
};

struct NotPsdError : Error {
    using Error::Error;
};

// Measurement outcome with zero probability for the given input.
struct ImpossibleOutcomeError : Error {
    using Error::Error;
};

struct EnumerationError : Error {
    using Error::Error;
};

struct RangeError : Error {
    using Error::Error;
};

}  // namespace qcut
