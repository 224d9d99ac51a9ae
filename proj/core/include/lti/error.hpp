#pragma once

#include <stdexcept>
#include <string>

namespace lti {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Inconsistent sizes, geometry or parameters.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// A value outside the domain of an operation (negative threshold, lowpass orientation...).
class ArgumentError : public Error {
public:
    using Error::Error;
};

/// Non-finite values encountered during an iterative method.
class NumericalError : public Error {
public:
    using Error::Error;
};

/// A metric that is undefined for the given inputs (e.g. relative error against zero).
class UndefinedMetricError : public Error {
public:
    using Error::Error;
};

/// A pipeline invariant was violated by the caller (e.g. overlapping supports).
class ContractError : public Error {
public:
    using Error::Error;
};

} // namespace lti
