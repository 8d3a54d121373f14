#pragma once

#include <stdexcept>
#include <string>

namespace sqg {

// Mode outside the admissible set |n| >= 3.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Grid too coarse to represent the requested spectrum without aliasing.
class AliasingError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Data outside the m-fold symmetric, mean-zero class.
class SymmetryError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Zero denominator hit by the normal-form division on a tuple where the
// multiplier does not vanish.
class ResonanceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Non-finite state or runaway norm during time integration.
class InstabilityError : public std::runtime_error {
 public:
  InstabilityError(const std::string& what, double last_valid_time)
      : std::runtime_error(what), last_valid_time_(last_valid_time) {}
  double last_valid_time() const noexcept { return last_valid_time_; }

 private:
  double last_valid_time_;
};

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace sqg
