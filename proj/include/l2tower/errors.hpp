#pragma once

#include <stdexcept>
#include <string>

namespace l2t {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent user input (CLI exit code 2).
class InputError : public Error {
public:
  using Error::Error;
};

/// A configured size or magnitude cap was hit (CLI exit code 3).
class BudgetExceeded : public Error {
public:
  using Error::Error;
};

class ElementCapExceeded : public BudgetExceeded {
public:
  using BudgetExceeded::BudgetExceeded;
};

class NotHomomorphism : public InputError {
public:
  using InputError::InputError;
};

class MismatchedPresentation : public InputError {
public:
  using InputError::InputError;
};

class RelatorNotKilled : public InputError {
public:
  using InputError::InputError;
};

class InsufficientLevels : public InputError {
public:
  using InputError::InputError;
};

class FieldTooSmall : public InputError {
public:
  using InputError::InputError;
};

class DegenerateMatrix : public Error {
public:
  using Error::Error;
};

/// Structural self-test failures: these indicate a bug, not bad input.
class IdentityViolated : public Error {
public:
  using Error::Error;
};

class MonotonicityViolated : public Error {
public:
  using Error::Error;
};

}  // namespace l2t
