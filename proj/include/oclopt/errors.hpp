#pragma once

#include <stdexcept>
#include <string>

namespace oclopt {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A stream was asked for a step outside [1, horizon].
class HorizonExceeded : public Error {
 public:
  using Error::Error;
};

/// Invalid or inconsistent experiment / module configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Non-finite loss, gradient or parameters.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

class EmptyPoolError : public Error {
 public:
  using Error::Error;
};

/// A theorem precondition (named assumption) does not hold.
class PreconditionError : public Error {
 public:
  PreconditionError(std::string assumption, const std::string& what)
      : Error(assumption + ": " + what), assumption_(std::move(assumption)) {}
  const std::string& assumption() const { return assumption_; }

 private:
  std::string assumption_;
};

}  // namespace oclopt
