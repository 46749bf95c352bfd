#pragma once

#include <stdexcept>
#include <string>

namespace qbc {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Requested object would exceed the configured size limit.
struct DimensionLimitError : Error {
    using Error::Error;
};

// Matrix or factor dimensions do not fit together.
struct ShapeError : Error {
    using Error::Error;
};

// Input lies outside the mathematical domain (e.g. not positive semidefinite).
struct DomainError : Error {
    using Error::Error;
};

// Kraus/POVM completeness or isometry condition violated.
struct InvalidChannelError : Error {
    using Error::Error;
};

// Label sets, trees or strategies are structurally inconsistent.
struct StructureError : Error {
    using Error::Error;
};

// Branch count exceeded the simulation cap.
struct ExplosionError : Error {
    using Error::Error;
};

// Operation forbidden by an instance policy (e.g. purifying a notarized strategy).
struct PolicyError : Error {
    using Error::Error;
};

// Invalid user configuration or definition file.
struct ConfigError : Error {
    using Error::Error;
};

}  // namespace qbc
