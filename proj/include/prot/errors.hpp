#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace prot {

// Rejected input: non-finite values, size mismatches, out-of-domain arguments.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// The learning-rate schedule is not usable at some step, i.e.
// gamma(t) >= min{A, 1/A}, or a table schedule ran past its end.
class ScheduleError : public std::runtime_error {
 public:
  ScheduleError(const std::string& what, std::size_t step)
      : std::runtime_error(what + " (step " + std::to_string(step) + ")"), step_(step) {}

  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

// A documented precondition of a check does not hold (e.g. fluc(t) > gamma(t)).
class PreconditionError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace prot
