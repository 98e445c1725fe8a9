#pragma once

#include <stdexcept>
#include <string>

namespace cstm {

// Base class for every error raised by the engine. The CLI maps the concrete
// subclasses onto process exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Shapes or labels that do not line up (matrix size vs state space, unknown
// state names, trace/model horizon mismatch).
class StructuralError : public Error {
 public:
  using Error::Error;
};

// Argument outside the mathematical domain of a function, e.g. p >= 1 for a
// probability-to-rate conversion.
class DomainError : public Error {
 public:
  using Error::Error;
};

// A transition model or derived model failed probability checks.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Non-finite values produced during a computation.
class NumericError : public Error {
 public:
  using Error::Error;
};

// Configuration or input file problems (parse errors, unresolved references).
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace cstm
