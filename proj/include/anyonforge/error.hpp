#pragma once

#include <stdexcept>
#include <string>

namespace anyonforge {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Invalid argument values (bad series/rank, out-of-range labels, ...).
class ParameterError : public Error {
public:
  using Error::Error;
};

/// Inputs whose shape is wrong: disconnected graphs, mismatched graphs.
class StructuralError : public Error {
public:
  using Error::Error;
};

/// A numerical decision could not be made safely (rank near the cutoff,
/// clustered eigenvalues after retries, non-integral fusion coefficients).
class NumericalError : public Error {
public:
  using Error::Error;
};

/// Requested dense object exceeds the configured size limit.
class SizeError : public Error {
public:
  using Error::Error;
};

} // namespace anyonforge
