#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace kswave {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid parameters or violated preconditions.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Field / grid shapes do not agree.
class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

/// Shooting trajectory left the invariant box or never reached the event.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

/// Step-size controller underflowed the minimum step.
class StiffnessError : public Error {
 public:
  using Error::Error;
};

/// p is not a discrete gradient (curl above threshold).
class CurlViolation : public Error {
 public:
  using Error::Error;
};

/// Non-zero perturbation inside the right buffer zone of the strip.
class BufferViolation : public Error {
 public:
  using Error::Error;
};

/// Malformed file or stream.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Malformed or inconsistent experiment configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Fixed time step exceeds the explicit stability bound.
class CflViolation : public Error {
 public:
  CflViolation(const std::string& what, std::size_t step) : Error(what), step_(step) {}
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

/// Non-finite values, runaway growth or lost positivity during time stepping.
class BlowUp : public Error {
 public:
  BlowUp(const std::string& what, std::size_t step) : Error(what), step_(step) {}
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

/// Density dropped below the negativity tolerance in a primitive run.
class NegativeDensity : public BlowUp {
 public:
  using BlowUp::BlowUp;
};

}  // namespace kswave
