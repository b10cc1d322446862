#pragma once

#include <stdexcept>
#include <string>

namespace sodcal {

// Every failure raised by the library derives from Error so callers can
// catch one type; the subclasses let the CLI map failures to exit codes.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A scalar parameter lies outside its admissible range (sigma, s, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

// Mismatched dimensions, empty lists, bad counts.
class ArgumentError : public Error {
public:
    using Error::Error;
};

// Grid contents violate the invariant of the requested map type.
class ValidationError : public Error {
public:
    using Error::Error;
};

// Malformed or truncated file.
class FormatError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

// Ground truth without foreground pixels: recall is undefined.
class DegenerateGroundTruthError : public Error {
public:
    using Error::Error;
};

class GenerationError : public Error {
public:
    using Error::Error;
};

}  // namespace sodcal
