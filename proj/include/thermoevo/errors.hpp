#pragma once

#include <stdexcept>
#include <string>

namespace thermoevo {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or out-of-range input (bad grid, non-finite samples, missing coefficient, ...).
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// A rational function was evaluated too close to one of its poles.
class PoleProximity : public Error {
 public:
  using Error::Error;
};

/// Signal does not decay at the window ends, so the Fourier-Laplace path would alias.
class WindowingError : public Error {
 public:
  using Error::Error;
};

class RepeatedPole : public Error {
 public:
  using Error::Error;
};

/// Time-step matrix could not be factorized.
class SingularSystem : public Error {
 public:
  using Error::Error;
};

class UnreachableTarget : public Error {
 public:
  using Error::Error;
};

class GridMismatch : public Error {
 public:
  using Error::Error;
};

/// The spectral oracle only handles spatially constant coefficients.
class NonconstantCoefficients : public Error {
 public:
  using Error::Error;
};

/// The weighted solution tail at t_max is too large for the a-priori bound to be meaningful.
class WindowTooShort : public Error {
 public:
  using Error::Error;
};

/// File could not be read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace thermoevo
