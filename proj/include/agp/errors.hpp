#pragma once
#include <stdexcept>
#include <string>

namespace agp {

// Base class for all errors raised by this library.
class AgpError : public std::runtime_error {
public:
    explicit AgpError(const std::string& message) : std::runtime_error(message) {}
};

// Malformed input file; message carries file and line number.
class ParseError : public AgpError {
public:
    explicit ParseError(const std::string& message) : AgpError(message) {}
};

// Data violates an invariant (referential integrity, missing ground truth, ...).
class DataError : public AgpError {
public:
    explicit DataError(const std::string& message) : AgpError(message) {}
};

// Bad configuration (flags, config file, infeasible world spec).
class ConfigError : public AgpError {
public:
    explicit ConfigError(const std::string& message) : AgpError(message) {}
};

// An operation was called with arguments that violate its preconditions.
class PreconditionError : public AgpError {
public:
    explicit PreconditionError(const std::string& message) : AgpError(message) {}
};

// Transport / backend failures.
class GatewayError : public AgpError {
public:
    explicit GatewayError(const std::string& message) : AgpError(message) {}
};

// Authentication rejected by the backend. Never retried.
class AuthError : public GatewayError {
public:
    explicit AuthError(const std::string& message) : GatewayError(message) {}
};

// Transient transport failure (connect failure, 429, 5xx). Retried with backoff.
class TransientError : public GatewayError {
public:
    explicit TransientError(const std::string& message) : GatewayError(message) {}
};

// Backend answered but the payload is not a usable chat completion.
class MalformedResponseError : public GatewayError {
public:
    explicit MalformedResponseError(const std::string& message) : GatewayError(message) {}
};

// A rerank response from which no usable ranking could be recovered.
class UnparseableRankingError : public AgpError {
public:
    explicit UnparseableRankingError(const std::string& message) : AgpError(message) {}
};

}  // namespace agp
