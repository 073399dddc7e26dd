#pragma once

#include <stdexcept>
#include <string>

namespace rramcap {

/// Bad argument or malformed input. Maps to CLI exit status 1.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Survey CSV problem; the message names the row and column.
class ParseError : public ValidationError {
 public:
  ParseError(const std::string& what, std::size_t row)
      : ValidationError(what + " (row " + std::to_string(row) + ")"), row_(row) {}

  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

/// Level index outside [0, L).
class IndexError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// Evaluation point where the output density vanishes.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A numerical procedure stopped at its cap without meeting its tolerance.
/// Maps to CLI exit status 3.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double last_delta)
      : std::runtime_error(what), last_delta_(last_delta) {}

  double last_delta() const noexcept { return last_delta_; }

 private:
  double last_delta_;
};

/// find_cmax hit its level-count cap before C(2L) - C(L) dropped below tolerance.
class SaturationError : public ConvergenceError {
 public:
  SaturationError(const std::string& what, double previous_bits, double last_bits)
      : ConvergenceError(what, last_bits - previous_bits),
        previous_bits_(previous_bits),
        last_bits_(last_bits) {}

  double previous_bits() const noexcept { return previous_bits_; }
  double last_bits() const noexcept { return last_bits_; }

 private:
  double previous_bits_;
  double last_bits_;
};

/// A capacity curve that never reaches 0.95 C_max.
class IncompleteCurveError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace rramcap
