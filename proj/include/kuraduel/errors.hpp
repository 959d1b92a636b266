#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace kuraduel {

/// Root of every error thrown by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Requested object would be too large for the dense representation.
class SizeError : public Error {
public:
  using Error::Error;
};

/// Operand shapes do not agree (vector lengths, block sizes, too-small networks).
class DimensionError : public Error {
public:
  using Error::Error;
};

class RetryLimitError : public Error {
public:
  using Error::Error;
};

/// Malformed edge-list text; carries the 1-based line number.
class ParseError : public Error {
public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

/// Red partition has an empty side, so the three-cluster analysis is undefined.
class DegeneratePartitionError : public Error {
public:
  using Error::Error;
};

/// Numerical failure: non-convergence, division by a vanishing quantity, bad bracket.
class NumericalError : public Error {
public:
  using Error::Error;
};

class DivergenceError : public NumericalError {
public:
  explicit DivergenceError(double t)
      : NumericalError("non-finite phase encountered at t = " + std::to_string(t)), time_(t) {}
  double time() const noexcept { return time_; }

private:
  double time_;
};

class BracketError : public NumericalError {
public:
  using NumericalError::NumericalError;
};

/// Cross couplings vanish so the centroid angle is not determined at this order.
class NoInteractionError : public NumericalError {
public:
  using NumericalError::NumericalError;
};

/// Every eigenvalue was classified as a zero mode.
class DegenerateSpectrumError : public NumericalError {
public:
  using NumericalError::NumericalError;
};

/// No admissible (real, stable) solution anywhere on the requested grid.
class InfeasibleError : public Error {
public:
  using Error::Error;
};

class WindowError : public Error {
public:
  using Error::Error;
};

/// Experiment config problem; the message names the line and/or section.key.
class ConfigError : public Error {
public:
  using Error::Error;
};

class ChecksumError : public Error {
public:
  using Error::Error;
};

} // namespace kuraduel
