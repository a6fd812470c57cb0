#pragma once

#include <stdexcept>
#include <string>

namespace mflow {

/// Base of every error the library throws on a violated precondition.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration: out-of-envelope spectral parameters, failed
/// growth certificates, unknown builtin names.
class ConfigError : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

/// The squared-density lift onto probabilities is undefined at 0.
class DegenerateInput : public Error {
 public:
  using Error::Error;
};

class GridMismatch : public Error {
 public:
  using Error::Error;
};

class NotProbability : public Error {
 public:
  using Error::Error;
};

/// Every importance weight underflowed or was zero (beta = +inf everywhere).
class AllWeightsZero : public Error {
 public:
  using Error::Error;
};

/// A non-finite value appeared where the contract requires a finite one.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace mflow
