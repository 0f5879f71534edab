#pragma once

#include <stdexcept>
#include <string>

namespace dcsit {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An argument is outside the mathematical domain of the operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

// A Monte Carlo estimate cannot be formed from the data supplied.
class EstimationError : public Error {
 public:
  using Error::Error;
};

// No valid phase plan exists for the requested parameters.
class PlanningError : public Error {
 public:
  using Error::Error;
};

// A geometric construction was asked for a zero or otherwise degenerate input.
class DegenerateInputError : public Error {
 public:
  using Error::Error;
};

// Symbols handed to the transmitter do not match the phase layout.
class MismatchError : public Error {
 public:
  using Error::Error;
};

// A payload did not survive the pack/unpack round trip.
class IntegrityError : public Error {
 public:
  using Error::Error;
};

}  // namespace dcsit
