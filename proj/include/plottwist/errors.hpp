#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace plottwist {

/// Base of every error raised by the pipeline. The CLI maps ConfigError to
/// exit status 2 and everything else to 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad configuration: missing credentials, malformed config files, bad flags.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Violated precondition on domain data (out-of-range rating, empty plot...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Malformed input file (JSONL line that does not describe a valid record).
class LoadError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Transport-level failure talking to a model backend. `transient` failures
/// are retried by the gateway; the error that escapes carries the last one.
class TransportError : public Error {
 public:
  TransportError(const std::string& what, bool transient = true)
      : Error(what), transient_(transient) {}
  bool transient() const noexcept { return transient_; }

 private:
  bool transient_;
};

/// A scripted mock received a request that no rule covers.
class ScriptGapError : public Error {
 public:
  using Error::Error;
};

/// Failure extracting a structured value from raw model output. Carries the
/// offending raw text for audit.
class ExtractionError : public Error {
 public:
  enum class Kind { Format, MissingField, Range };

  ExtractionError(Kind kind, const std::string& what, std::string raw)
      : Error(what), kind_(kind), raw_(std::move(raw)) {}

  Kind kind() const noexcept { return kind_; }
  const std::string& raw() const noexcept { return raw_; }

 private:
  Kind kind_;
  std::string raw_;
};

/// Every model in a rating ensemble failed for one (plot, aspect).
class RatingUnavailableError : public Error {
 public:
  using Error::Error;
};

/// Statistics on inputs with zero variance or too few samples.
class DegenerateInputError : public Error {
 public:
  using Error::Error;
};

/// Records that should pair one-to-one do not. Lists the offending ids.
class PairingError : public Error {
 public:
  using Error::Error;
};

}  // namespace plottwist
