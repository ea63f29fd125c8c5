#pragma once

#include <stdexcept>
#include <string>

namespace wfchain {

// Base of every error the library raises. Each subclass maps onto one failure
// class of the public API so callers (and the CLI exit codes) can dispatch on it.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input document; message names the offending JSON path.
class ParseError : public Error {
 public:
  using Error::Error;
};

// Structurally well-formed input that breaks a model invariant (cycles, dangling ids).
class ValidationError : public Error {
 public:
  using Error::Error;
};

class LookupError : public Error {
 public:
  using Error::Error;
};

class CatalogError : public Error {
 public:
  using Error::Error;
};

class FeasibilityError : public Error {
 public:
  using Error::Error;
};

class BindingError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class SelectionError : public Error {
 public:
  using Error::Error;
};

class ApplicationError : public Error {
 public:
  using Error::Error;
};

class NoFeasibleChainError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace wfchain
