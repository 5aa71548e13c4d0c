#pragma once

#include <stdexcept>
#include <string>

namespace cimdet {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Shape or size of an argument does not match the operation's contract.
struct DimensionError : Error {
    using Error::Error;
};

// Cholesky pivot failure: matrix is not (numerically) positive definite.
struct SingularMatrixError : Error {
    using Error::Error;
};

// Exhaustive search would exceed the tractability guard.
struct SearchSpaceError : Error {
    using Error::Error;
};

// Requested transform variant is not defined (legacy kind beyond K = 2).
struct UnsupportedTransformError : Error {
    using Error::Error;
};

// All channel eigenvalues below threshold; the radius heuristic is undefined.
struct DegenerateChannelError : Error {
    using Error::Error;
};

// A value is not a member of the active constellation.
struct SymbolError : Error {
    using Error::Error;
};

// Malformed, truncated or inconsistent channel trace file.
struct TraceError : Error {
    using Error::Error;
};

// Invalid experiment configuration (bad key, bad value, missing file, ...).
struct ConfigError : Error {
    using Error::Error;
};

}  // namespace cimdet
