#pragma once

#include <stdexcept>
#include <string>

namespace qacoustic {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidMaterialError : public Error {
 public:
  using Error::Error;
};

/// No reciprocal-lattice point fits under the cutoff.
class EmptyBathError : public Error {
 public:
  using Error::Error;
};

/// Inputs that must describe the same grid or mode set do not.
class ConsistencyError : public Error {
 public:
  using Error::Error;
};

/// The spectral covariance of a noise kernel could not be factored.
class FactorizationError : public Error {
 public:
  using Error::Error;
};

class ConfigurationError : public Error {
 public:
  using Error::Error;
};

class QuadratureError : public Error {
 public:
  QuadratureError(const std::string& what, double worst_a, double worst_b)
      : Error(what), worst_a_(worst_a), worst_b_(worst_b) {}
  double worst_a() const { return worst_a_; }
  double worst_b() const { return worst_b_; }

 private:
  double worst_a_;
  double worst_b_;
};

/// Every realization of an ensemble diverged.
class EnsembleFailureError : public Error {
 public:
  using Error::Error;
};

}  // namespace qacoustic
