#pragma once

#include <stdexcept>
#include <string>

namespace mde {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input: dimension mismatches, bad weights, invalid arguments,
/// unreadable files or configs.
class InputError : public Error {
public:
    using Error::Error;
};

/// Numerical failure: overflowing trajectories, NaN results, solver
/// non-convergence.
class NumericalError : public Error {
public:
    using Error::Error;
};

}  // namespace mde
