#pragma once

#include <stdexcept>
#include <string>

namespace radar {

/// Base of every error thrown by the library. The CLI maps the concrete
/// subclasses onto exit codes.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An argument lies outside the domain of the operation (x <= 0, negative tau, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Inconsistent or invalid configuration (bad step size, bad graph size, ...).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// A computation produced a non-finite value or failed to converge.
class NumericalError : public Error {
public:
    using Error::Error;
};

class InsufficientDataError : public Error {
public:
    using Error::Error;
};

/// Regression input has no spread in the regressor.
class DegenerateFitError : public Error {
public:
    using Error::Error;
};

class LookupError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

/// Command-line or parameter-override misuse.
class UsageError : public Error {
public:
    using Error::Error;
};

}  // namespace radar
