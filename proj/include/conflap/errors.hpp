#pragma once

#include <stdexcept>
#include <string>

namespace conflap {

/// Root of every exception thrown by the library.
class error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Inputs violate a documented precondition (bad parameters, poles, shape mismatch).
class validation_error : public error {
 public:
  using error::error;
};

/// A numerical procedure failed to reach its tolerance on valid inputs.
class numerical_error : public error {
 public:
  using error::error;
};

class parameter_error : public validation_error {
 public:
  using validation_error::validation_error;
};

class domain_error : public validation_error {
 public:
  using validation_error::validation_error;
};

class pole_error : public validation_error {
 public:
  using validation_error::validation_error;
};

class convergence_error : public numerical_error {
 public:
  using numerical_error::numerical_error;
};

class resolution_error : public numerical_error {
 public:
  using numerical_error::numerical_error;
};

}  // namespace conflap
