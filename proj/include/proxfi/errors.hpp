#pragma once

#include <stdexcept>
#include <string>

namespace proxfi {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidParameter : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

// A caller violated an operation's documented precondition (e.g. h >= 1/L).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

class NonConvergence : public Error {
 public:
  NonConvergence(const std::string& what, double final_residual)
      : Error(what), final_residual_(final_residual) {}
  double final_residual() const noexcept { return final_residual_; }

 private:
  double final_residual_;
};

// Grid mismatch, kernel wider than the grid, or tail mass escaping the grid.
class GridError : public Error {
 public:
  using Error::Error;
};

// An acceptance probability exceeded one: the certified L is wrong.
class SmoothnessViolation : public Error {
 public:
  using Error::Error;
};

class RunawayRejection : public Error {
 public:
  using Error::Error;
};

// The supplied RGO mode does not satisfy the prox optimality condition.
class StaleMode : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// A report does not contain the series an export asked for.
class MissingSeries : public Error {
 public:
  using Error::Error;
};

}  // namespace proxfi
