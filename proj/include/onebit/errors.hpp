#pragma once

#include <stdexcept>
#include <string>

namespace onebit {

// Thrown when a configuration has no stationary regime (load >= 1).
class InstabilityError : public std::domain_error {
 public:
  explicit InstabilityError(const std::string &what) : std::domain_error(what) {}
};

// Quadrature non-convergence, ODE integration quality failures, and similar.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string &what) : std::runtime_error(what) {}
};

// Optimizer bracket expansion exhausted.
class SearchError : public std::runtime_error {
 public:
  explicit SearchError(const std::string &what) : std::runtime_error(what) {}
};

}  // namespace onebit
