#pragma once

#include <stdexcept>
#include <string>

namespace sgeo {

// Malformed or ill-posed input: bad parameters, failed preconditions.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// The limit F'(σε)/F'(ε) does not exist, so C_f is undefined.
class NonOscillationError : public InvalidInput {
 public:
  explicit NonOscillationError(const std::string& detail)
      : InvalidInput("non-oscillation condition fails: " + detail) {}
};

class QuadratureError : public std::runtime_error {
 public:
  QuadratureError(const std::string& what, double achieved)
      : std::runtime_error(what), achieved_(achieved) {}
  double achieved() const noexcept { return achieved_; }

 private:
  double achieved_;
};

// Step-size underflow, shell drift, or an ambiguous radial/winding split.
class IntegrationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace sgeo
