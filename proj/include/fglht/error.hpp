#pragma once

#include <stdexcept>
#include <string>

namespace fglht {

/// Base class for every error thrown by this library.
struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed input file: missing column, empty file, bad header.
struct SchemaError : Error {
  using Error::Error;
};

/// A data row that cannot be parsed; message carries the line number.
struct ParseError : Error {
  using Error::Error;
};

/// Shapes or counts that do not line up (k, p, M, group sizes).
struct DimensionError : Error {
  using Error::Error;
};

/// A pooled covariance matrix that stays singular after the ridge policy.
struct SingularityError : Error {
  using Error::Error;
};

/// Effectively noiseless data: cumulant estimates are not positive.
struct DegenerateError : Error {
  using Error::Error;
};

/// A group too small for the requested operation.
struct SizeError : Error {
  using Error::Error;
};

/// Invalid hypothesis matrix (rank deficient, q >= k).
struct HypothesisError : Error {
  using Error::Error;
};

}  // namespace fglht
