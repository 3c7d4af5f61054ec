#pragma once

#include <stdexcept>
#include <string>

namespace nlinv {

// Point outside the kernel or grid domain.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Invalid argument value (nonpositive lambda, bad sizes of scalar inputs, ...).
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Vectors living on different grids or matrices with mismatched shapes.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Too few reliable data points for a fit.
class InsufficientDataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Singular solves, non-finite values, failed iterations.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Fixed-point or family construction failed.
class ConstructionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed configuration documents.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace nlinv
