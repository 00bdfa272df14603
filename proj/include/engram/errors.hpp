#pragma once

#include <stdexcept>
#include <string>

namespace engram {

/// Base class for every error thrown by this library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A vector had a different dimension than the one the component was configured with.
class DimensionMismatchError : public Error {
public:
    DimensionMismatchError(int expected, int actual, const std::string& context)
        : Error(context + ": expected dimension " + std::to_string(expected) +
                ", got " + std::to_string(actual)),
          expected(expected),
          actual(actual) {}
    int expected;
    int actual;
};

/// Cosine similarity is undefined for zero-norm vectors; we refuse rather than return 0.
class ZeroNormError : public Error {
public:
    using Error::Error;
};

/// Persistence-layer failure (sqlite errors, I/O).
class StorageError : public Error {
public:
    using Error::Error;
};

/// A referenced entity (record id, conversation, template file) does not exist.
class NotFoundError : public Error {
public:
    using Error::Error;
};

/// Input file violated the expected schema; message names the offending path/field.
class SchemaError : public Error {
public:
    using Error::Error;
};

/// Network-level failure talking to a provider (after retries were exhausted).
class TransportError : public Error {
public:
    using Error::Error;
};

/// The provider answered, but the payload could not be interpreted.
class ProtocolError : public Error {
public:
    ProtocolError(const std::string& message, std::string payload)
        : Error(message), raw_payload(std::move(payload)) {}
    std::string raw_payload;
};

/// Routing failed for a specific turn and no fallback was configured.
class RoutingError : public Error {
public:
    using Error::Error;
};

/// A caller violated an operation precondition (empty question, bad config value).
class PreconditionError : public Error {
public:
    using Error::Error;
};

}  // namespace engram
