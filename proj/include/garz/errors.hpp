#pragma once

#include <stdexcept>
#include <string>

namespace garz {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A structural assumption on the velocity pair failed on the validation grid.
class AssumptionViolation : public Error {
 public:
  AssumptionViolation(std::string name, double worst_point, double worst_value)
      : Error("assumption violated: " + name + " (worst at rho=" +
              std::to_string(worst_point) +
              ", value=" + std::to_string(worst_value) + ")"),
        name_(std::move(name)),
        worst_point_(worst_point),
        worst_value_(worst_value) {}

  const std::string& name() const { return name_; }
  double worst_point() const { return worst_point_; }
  double worst_value() const { return worst_value_; }

 private:
  std::string name_;
  double worst_point_;
  double worst_value_;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class RootNotBracketed : public Error {
 public:
  using Error::Error;
};

class OutOfRange : public Error {
 public:
  using Error::Error;
};

class OrderingError : public Error {
 public:
  using Error::Error;
};

class CflViolation : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class VacuumError : public Error {
 public:
  using Error::Error;
};

// Internal bug sentinel raised by the marching scheme.
class InvariantViolation : public Error {
 public:
  using Error::Error;
};

class NoIntermediateState : public Error {
 public:
  using Error::Error;
};

class SupportError : public Error {
 public:
  using Error::Error;
};

class FrontLost : public Error {
 public:
  using Error::Error;
};

}  // namespace garz
