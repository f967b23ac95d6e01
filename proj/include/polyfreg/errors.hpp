#pragma once

#include <stdexcept>
#include <string>

namespace polyfreg {

// Root of the library's exception hierarchy. Callers that do not care about
// the specific failure can catch this single type.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Invalid argument values: bad intervals, negative penalties, length
// mismatches between conforming vectors.
class InvalidArgumentError : public Error {
 public:
  using Error::Error;
};

// Malformed textual input: CSV rows, config files, truth specifications.
class DataFormatError : public Error {
 public:
  using Error::Error;
};

// Structurally valid data whose shape does not match what an operation
// needs (wrong grid length, sample/response count mismatch, grid mismatch
// between a model and a new input).
class DataShapeError : public Error {
 public:
  using Error::Error;
};

// A raw profile does not cover the requested grid interval.
class GridNotCoveredError : public DataShapeError {
 public:
  using DataShapeError::DataShapeError;
};

// A stratified split was asked for more samples of a class than exist.
class InsufficientStratumError : public DataShapeError {
 public:
  using DataShapeError::DataShapeError;
};

// The aggregation Gram system is identically zero (all base models predict
// zero everywhere), so no aggregation coefficients are defined.
class DegenerateAggregationError : public Error {
 public:
  using Error::Error;
};

// A linear solve could not produce finite coefficients.
class SolverFailureError : public Error {
 public:
  using Error::Error;
};

}  // namespace polyfreg
