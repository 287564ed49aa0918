#pragma once

#include <stdexcept>

namespace diversenet {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Tensor shapes incompatible with the requested operation.
struct DimensionError : Error {
  using Error::Error;
};

// Bad argument value: empty list, out-of-range index, k > M, ...
struct ArgumentError : Error {
  using Error::Error;
};

// A configuration value violates its constraints.
struct ConfigError : Error {
  using Error::Error;
};

// An operation was applied to an object of the wrong kind or mode.
struct UsageError : Error {
  using Error::Error;
};

// A text file could not be parsed; message names file/line/field.
struct ParseError : Error {
  using Error::Error;
};

// A persisted model or dataset failed validation on load.
struct LoadError : Error {
  using Error::Error;
};

// Training produced a non-finite loss; message names epoch/batch.
struct TrainingError : Error {
  using Error::Error;
};

// A numerical routine left its valid domain.
struct NumericalError : Error {
  using Error::Error;
};

}  // namespace diversenet
