#pragma once

#include <stdexcept>
#include <string>

namespace fraudlens {

// Base for every error the library raises on purpose.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad configuration: unknown formats, infeasible generator specs, invalid
// weights or profiles.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// The input stream itself could not be read. Malformed lines are not errors;
// they are reported per line by the ingest result.
class IngestError : public Error {
 public:
  using Error::Error;
};

class NotFoundError : public Error {
 public:
  using Error::Error;
};

// A session command arrived in a status that does not accept it.
class InvalidTransition : public Error {
 public:
  InvalidTransition(std::string reason, const std::string& message)
      : Error(message), reason_(std::move(reason)) {}

  // Machine-readable reason, e.g. "playlist_exhausted".
  const std::string& reason() const noexcept { return reason_; }

 private:
  std::string reason_;
};

// Caller broke a documented precondition.
class ContractViolation : public Error {
 public:
  using Error::Error;
};

}  // namespace fraudlens
