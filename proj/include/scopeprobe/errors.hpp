#pragma once

#include <stdexcept>
#include <string>

namespace scopeprobe {

// Root of all library errors. Subtypes map onto CLI exit codes:
// validation/analysis -> 1, partial scoring -> 2, transport/config -> 3.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed input file (bad line, missing field, bad number).
class ParseError : public Error {
 public:
  using Error::Error;
};

// A dataset invariant does not hold (duplicate id, dangling pair_id, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Bad run configuration or backend descriptor.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Network-level failure talking to a remote backend.
class TransportError : public Error {
 public:
  using Error::Error;
};

// Remote backend answered, but the reply violates the protocol.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

// A backend produced an unusable score (probability 0, non-finite,
// context overflow, unsupported mode).
class ScoringError : public Error {
 public:
  using Error::Error;
};

// Invalid input to a metrics operation.
class MetricError : public Error {
 public:
  using Error::Error;
};

// Degenerate design or invalid input to a statistics operation.
class StatsError : public Error {
 public:
  using Error::Error;
};

}  // namespace scopeprobe
