#pragma once

#include <stdexcept>
#include <string>

namespace offload {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Out-of-range or malformed numeric input.
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// A caller broke an operation's precondition (e.g. schedule missing a subtree).
class ContractError : public Error {
 public:
  using Error::Error;
};

class InfeasibleError : public Error {
 public:
  using Error::Error;
};

class GenerationError : public Error {
 public:
  using Error::Error;
};

class UnreachableError : public Error {
 public:
  using Error::Error;
};

/// Scenario or file content that fails schema validation.
class ValidationError : public Error {
 public:
  using Error::Error;
};

}  // namespace offload
