#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ccmvlc {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A sampled conjugation function (or optimizer iterate) broke a constraint.
class ConstraintViolation : public Error {
 public:
  ConstraintViolation(std::size_t index, const std::string& what)
      : Error(what + " (sample " + std::to_string(index) + ")"), index_(index) {}

  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

class LengthMismatch : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace ccmvlc
