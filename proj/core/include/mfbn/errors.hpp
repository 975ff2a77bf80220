#pragma once

#include <stdexcept>
#include <string>

namespace mfbn {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A network, mean vector or clamp violates a structural invariant.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Malformed network or dataset text.
class ParseError : public Error {
public:
    using Error::Error;
};

/// An activation was evaluated outside its domain.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Exact enumeration requested over more free units than supported.
class SizeError : public Error {
public:
    using Error::Error;
};

/// Invalid experiment/solver/training configuration.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Relative error requested against a log-partition of zero.
class DegenerateClampError : public Error {
public:
    using Error::Error;
};

}  // namespace mfbn
