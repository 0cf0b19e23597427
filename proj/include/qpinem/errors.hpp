#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace qpinem {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A requested index or state does not fit inside the truncated basis.
class TruncationError : public Error {
 public:
  using Error::Error;
};

/// An argument lies outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Mandel Q requested for a distribution with zero mean photon number.
class UndefinedQError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// Post-selection on an outcome whose probability is numerically zero.
class ZeroProbabilityError : public Error {
 public:
  using Error::Error;
};

/// Log-linear fit could not be performed.
class FitError : public Error {
 public:
  using Error::Error;
};

/// Scenario configuration failed validation. `path` names the offending field.
class ConfigError : public Error {
 public:
  ConfigError(std::string path, const std::string& message)
      : Error(path.empty() ? message : path + ": " + message), path_(std::move(path)) {}

  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

}  // namespace qpinem
