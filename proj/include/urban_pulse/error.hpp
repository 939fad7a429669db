#pragma once

#include <stdexcept>
#include <string>

namespace urban_pulse {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A caller-supplied value violates an operation's precondition.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// Malformed input file (config, CSV header, field file, catalog).
class FormatError : public Error {
public:
    using Error::Error;
};

/// A field file was produced for a different mesh than the one it is read against.
class DimensionMismatch : public FormatError {
public:
    using FormatError::FormatError;
};

/// Lookup of an unknown city, scenario, pulse or field.
class NotFound : public Error {
public:
    using Error::Error;
};

} // namespace urban_pulse
