#pragma once

#include <stdexcept>
#include <string>

namespace latconf {

// Base class for every error the toolkit throws.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed input text. Carries the 1-based offending line when known.
class ParseError : public Error {
 public:
  explicit ParseError(const std::string& msg, int line = 0)
      : Error(line > 0 ? msg + " (line " + std::to_string(line) + ")" : msg),
        line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

// A structural invariant of a lattice or network is violated.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// An operation was invoked outside its contract.
class ContractError : public Error {
 public:
  using Error::Error;
};

// A computation produced or received a non-finite value.
class NumericError : public Error {
 public:
  using Error::Error;
};

// Training diverged; reports the epoch at which the loss became non-finite.
class TrainingError : public Error {
 public:
  TrainingError(const std::string& msg, int epoch)
      : Error(msg + " (epoch " + std::to_string(epoch) + ")"), epoch_(epoch) {}
  int epoch() const { return epoch_; }

 private:
  int epoch_;
};

// Network construction could not satisfy the structural postconditions.
class ConstructionError : public Error {
 public:
  using Error::Error;
};

// An enumeration exceeded its configured cap.
class EnumerationError : public Error {
 public:
  using Error::Error;
};

// Calibrator fitting received degenerate data.
class FitError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace latconf
