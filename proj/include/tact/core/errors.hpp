#pragma once

#include <stdexcept>
#include <string>

namespace tact {

struct DimensionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ParameterError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct GeometryError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CalibrationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct EmptyDatasetError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Raised when a training run produces a non-finite loss.
struct TrainingError : NumericError {
  TrainingError(const std::string& msg, int epoch_in)
      : NumericError(msg), epoch(epoch_in) {}
  int epoch;
};

}  // namespace tact
