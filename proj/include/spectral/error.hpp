#pragma once

#include <stdexcept>
#include <string>

namespace spectral {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent user input: model files, configs, arguments.
class InputError : public Error {
public:
    using Error::Error;
};

/// A model that violates the admissible two-stage class.
class ModelError : public InputError {
public:
    using InputError::InputError;
};

/// Numerical routines that could not deliver a trustworthy result.
class NumericalError : public Error {
public:
    using Error::Error;
};

} // namespace spectral
