#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mosdist {

/// Base class for every error thrown by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Degenerate score range (range_max <= range_min).
class InvalidRangeError : public Error {
 public:
  using Error::Error;
};

/// A value falls outside its declared domain.
class OutOfRangeError : public Error {
 public:
  using Error::Error;
};

/// Non-finite or otherwise malformed numeric input.
class InvalidInputError : public Error {
 public:
  using Error::Error;
};

/// Mismatched vector/matrix dimensions.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Zero-variance score distribution; the Gaussian path cannot be used.
class DegenerateDistributionError : public Error {
 public:
  using Error::Error;
};

/// The singular post-adjustment rescale cannot satisfy the mean constraint.
class InconsistentAdjustmentError : public Error {
 public:
  using Error::Error;
};

/// Correlation requested on a zero-variance series.
class UndefinedCorrelationError : public Error {
 public:
  using Error::Error;
};

/// Ensemble over an empty member list.
class EmptyEnsembleError : public Error {
 public:
  using Error::Error;
};

/// Input lacks the representation an operation requires
/// (e.g. ensembling scalar-only predictions).
class UnsupportedInputError : public Error {
 public:
  using Error::Error;
};

/// Malformed file content; message carries path and line number.
class ParseError : public Error {
 public:
  using Error::Error;
  ParseError(const std::string& path, std::size_t line, const std::string& what)
      : Error(path + ":" + std::to_string(line) + ": " + what) {}
};

/// Well-formed input that violates a declared constraint.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Prediction and ground-truth item sets disagree.
class AlignmentError : public Error {
 public:
  using Error::Error;
};

/// Too few items to evaluate.
class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

/// Training produced a non-finite loss.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

/// File could not be opened or written.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace mosdist
