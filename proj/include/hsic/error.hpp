#pragma once

#include <stdexcept>
#include <string>

namespace hsic {

/// Base of every error raised by the library. The CLI maps the concrete
/// subclasses onto its exit codes.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or out-of-contract input (bad shape, non-finite value, ...).
class InputError : public Error {
public:
    using Error::Error;
};

/// The data admit no usable null approximation, e.g. a constant kernel.
class DegenerateError : public Error {
public:
    using Error::Error;
};

/// A numerical routine failed to converge or produced an impossible value.
class NumericError : public Error {
public:
    using Error::Error;
};

}  // namespace hsic
