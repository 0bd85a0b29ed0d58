#pragma once

#include <stdexcept>
#include <string>
#include <utility>

#include "tcca/types.hpp"

namespace tcca {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed files, configs, shape mismatches, out-of-range modes.
class InputError : public Error {
 public:
  using Error::Error;
};

/// A linear system that needed full rank was rank deficient.
class RankDeficientError : public Error {
 public:
  using Error::Error;
};

/// A matrix expected to be positive semidefinite had a negative eigenvalue.
class NotPsdError : public Error {
 public:
  using Error::Error;
};

/// An operation received an all-zero input it cannot handle.
class ZeroInputError : public Error {
 public:
  using Error::Error;
};

/// A projection or contraction collapsed to zero variance.
class DegenerateProjectionError : public Error {
 public:
  using Error::Error;
};

/// A projector was requested from a basis too ill-conditioned to trust.
class IllConditionedError : public Error {
 public:
  using Error::Error;
};

/// Iteration budget exhausted. Carries the best iterate and its certified gap.
class BudgetError : public Error {
 public:
  BudgetError(const std::string& msg, Vector best, double gap)
      : Error(msg), best_(std::move(best)), gap_(gap) {}

  const Vector& best() const { return best_; }
  double gap() const { return gap_; }

 private:
  Vector best_;
  double gap_;
};

}  // namespace tcca
