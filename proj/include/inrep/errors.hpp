#pragma once

#include <stdexcept>
#include <string>

namespace inrep {

// Bad call-site usage: wrong shapes, empty inputs, out-of-range ids.
class usage_error : public std::invalid_argument {
public:
  explicit usage_error(const std::string& what) : std::invalid_argument(what) {}
};

// Input outside the mathematical domain of an operation.
class domain_error : public std::domain_error {
public:
  explicit domain_error(const std::string& what) : std::domain_error(what) {}
};

// Malformed or inconsistent configuration (CLI exit code 2).
class config_error : public std::runtime_error {
public:
  explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

// Non-finite values or diverged iterations (CLI exit code 3).
class numerical_error : public std::runtime_error {
public:
  explicit numerical_error(const std::string& what) : std::runtime_error(what) {}
};

// Fixed-point inversion did not converge; carries the last residual norm.
class convergence_error : public std::runtime_error {
public:
  convergence_error(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const { return residual_; }

private:
  double residual_;
};

}  // namespace inrep
