#pragma once

#include <stdexcept>
#include <string>

namespace nre {

// Bad or inconsistent input data (files, labels, dimensions).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Model file could not be read back: schema, version or checksum problems.
class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Non-finite values or other numeric breakdowns during training/scoring.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Remote benchmark download failed. status() is the HTTP status when one was
// received, 0 for transport-level failures.
class FetchError : public DataError {
 public:
  FetchError(const std::string& what, int status) : DataError(what), status_(status) {}
  int status() const noexcept { return status_; }

 private:
  int status_;
};

}  // namespace nre
