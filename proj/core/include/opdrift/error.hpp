#pragma once

#include <stdexcept>
#include <string>

namespace opdrift {

// Process exit codes used by the CLI; every library error maps onto one.
enum class ExitCode : int {
  kOk = 0,
  kBadInput = 2,
  kInsufficientData = 3,
  kNumericFailure = 4,
};

class Error : public std::runtime_error {
 public:
  Error(ExitCode code, const std::string& what) : std::runtime_error(what), code_(code) {}

  ExitCode code() const noexcept { return code_; }

 private:
  ExitCode code_;
};

// Malformed files, invalid arguments, shape mismatches.
class InputError : public Error {
 public:
  explicit InputError(const std::string& what) : Error(ExitCode::kBadInput, what) {}
};

// The dataset does not cover enough months (or samples) for the requested pipeline.
class InsufficientDataError : public Error {
 public:
  explicit InsufficientDataError(const std::string& what)
      : Error(ExitCode::kInsufficientData, what) {}
};

class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what) : Error(ExitCode::kNumericFailure, what) {}
};

}  // namespace opdrift
