#pragma once

#include <stdexcept>
#include <string>

namespace fseg {

/// Base class for every error raised by the library. Each subclass names a
/// failure category so callers (notably the CLI) can report or skip per item.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed FST file, palette file or image header.
class FormatError : public Error {
public:
    using Error::Error;
};

/// Shapes that do not conform (rank too large, channel mismatch, ...).
class DimensionError : public Error {
public:
    using Error::Error;
};

/// Values that violate a domain invariant: NaN/Inf, negative activations,
/// labels out of range.
class InputError : public Error {
public:
    using Error::Error;
};

/// File-system failures; the message always carries the path.
class IoError : public Error {
public:
    using Error::Error;
};

/// A cluster center or fixed concept row with zero norm.
class DegenerateError : public Error {
public:
    using Error::Error;
};

/// Fewer samples than the requested number of clusters, or an empty corpus.
class InsufficientDataError : public Error {
public:
    using Error::Error;
};

/// Probe training without examples for some category.
class CoverageError : public Error {
public:
    using Error::Error;
};

/// Requested operation is outside what this version supports.
class UnsupportedError : public Error {
public:
    using Error::Error;
};

}  // namespace fseg
