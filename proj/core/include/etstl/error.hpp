#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace etstl {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed formula text. `position()` is the 0-based byte offset of the
/// offending token.
class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t position);
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

/// Formula is syntactically valid but violates a structural rule of the
/// supported fragment (interval order, atom ordering, concavity, dimension).
class FormulaError : public Error {
 public:
  using Error::Error;
};

/// The normalized error left (-1, 0): the prescribed funnel was broken.
class FunnelViolation : public Error {
 public:
  FunnelViolation(const std::string& message, double xi, double time);
  double xi() const { return xi_; }
  double time() const { return time_; }

 private:
  double xi_;
  double time_;
};

class InfeasibleSynthesis : public Error {
 public:
  using Error::Error;
};

class OptimizationError : public Error {
 public:
  using Error::Error;
};

/// The admissible trigger box collapsed below the configured floor.
class TriggerFloorError : public Error {
 public:
  using Error::Error;
};

/// A sequenced task reached its deadline without being satisfied.
class TaskFailure : public Error {
 public:
  TaskFailure(const std::string& message, double time);
  double time() const { return time_; }

 private:
  double time_;
};

class WindowNotCovered : public Error {
 public:
  using Error::Error;
};

}  // namespace etstl
