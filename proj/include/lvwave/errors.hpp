#pragma once

#include <stdexcept>
#include <string>

namespace lvwave {

/// Base of every failure raised by the library. Solver failures map to CLI exit code 3.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid parameters or a violated precondition (bad family, T <= 0, assumption failure).
class DomainError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public Error {
 public:
  using Error::Error;
};

class NoInteriorFixedPoint : public ConvergenceError {
 public:
  using ConvergenceError::ConvergenceError;
};

/// State left the admissible box or became non-finite.
class SolverBlowup : public Error {
 public:
  using Error::Error;
};

class FrontLost : public Error {
 public:
  using Error::Error;
};

class NonMonotoneFront : public Error {
 public:
  using Error::Error;
};

}  // namespace lvwave
