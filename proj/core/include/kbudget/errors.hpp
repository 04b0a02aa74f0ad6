#pragma once

#include <stdexcept>
#include <string>

namespace kbudget {

/// Caller broke a documented precondition (bad index, wrong shape, invalid
/// parameter). Not recoverable by retrying.
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// A metered Gram oracle refused to reveal a new entry because its budget of
/// distinct entries is spent. Experiments catch this to measure
/// accuracy-at-budget.
class BudgetExhausted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A bound or formula was evaluated outside the range where it is stated.
class RangeError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Factorization hit a matrix that is not PSD / not invertible within tolerance.
class NumericalDegeneracy : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Instance generation could not satisfy its constraints.
class GenerationFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Instance lacks structure an operation relies on (e.g. a basis vector never
/// drawn).
class DegenerateInstance : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Error raised by one stage of a multi-stage pipeline; `stage()` names it.
class StageError : public std::runtime_error {
 public:
  StageError(std::string stage, const std::string& what)
      : std::runtime_error(stage + ": " + what), stage_(std::move(stage)) {}

  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

}  // namespace kbudget
