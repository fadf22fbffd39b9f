#pragma once

#include <stdexcept>
#include <string>

namespace crnf {

// Malformed or unsupported input (bad document, wrong grading, truncation too low).
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The exact backend met a step that needs an irrational number.
class NeedsApproxBackend : public InputError {
 public:
  explicit NeedsApproxBackend(const std::string& what)
      : InputError(what + " (re-run with the approx backend)") {}
};

// Type detection verdicts that stop the pipeline.
class LeviNondegenerate : public InputError {
 public:
  LeviNondegenerate() : InputError("Levi nondegenerate point (type 2); not handled") {}
};

class TypeExceedsBound : public InputError {
 public:
  explicit TypeExceedsBound(int bound)
      : InputError("type exceeds bound " + std::to_string(bound) +
                   ": u = 0 slice is harmonic through that degree (possibly infinite type)"),
        bound_(bound) {}
  int bound() const { return bound_; }

 private:
  int bound_;
};

// Something that the theory guarantees did not hold (singular or non-square
// per-weight system, failed round trip). Always a bug or a precision problem.
class InvariantViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace crnf
