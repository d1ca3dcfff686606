#pragma once

#include <stdexcept>
#include <string>

namespace stec {

/// Raised for bad user input or data: malformed files, failed validation,
/// unsupported requests. The CLI maps it to exit code 2.
class DataError : public std::runtime_error {
public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

/// Calibration would produce a non-physical spec (e.g. negative alpha).
class CalibrationError : public DataError {
public:
  explicit CalibrationError(const std::string& what) : DataError(what) {}
};

}  // namespace stec
