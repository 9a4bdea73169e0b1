#pragma once

#include <stdexcept>
#include <string>

namespace rpmguard {

// Base class for all library errors. The CLI maps these to exit code 2.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Preconditions violated by the caller (empty inputs, bad parameters).
class InvalidInputError : public Error {
 public:
  using Error::Error;
};

// A symbol code or tag that does not belong to the bound alphabet.
class AlphabetMismatchError : public Error {
 public:
  using Error::Error;
};

// Malformed documents: model files, config files, log lines, label files.
class ParseError : public Error {
 public:
  using Error::Error;
};

// Event-log records that cannot be admitted into the pipeline.
class IngestionError : public Error {
 public:
  using Error::Error;
};

// Device profile fitting failures (too few readings, zero variance).
class ProfileError : public Error {
 public:
  using Error::Error;
};

// Cartesian expansion of a window exceeded the configured cap.
class ExpansionOverflowError : public Error {
 public:
  using Error::Error;
};

// Threshold calibration failures (empty training set, no windows).
class CalibrationError : public Error {
 public:
  using Error::Error;
};

// Evaluation protocol violations (a window evaluated twice, etc.).
class ProtocolError : public Error {
 public:
  using Error::Error;
};

}  // namespace rpmguard
