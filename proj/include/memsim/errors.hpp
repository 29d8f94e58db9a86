#pragma once

#include <stdexcept>
#include <string>

namespace memsim {

// Status codes shared with the C API; memsim.h mirrors these values.
enum class Status : int {
  Ok = 0,
  InvalidArgument = 1,
  ConfigError = 2,
  NumericError = 3,
  IoError = 4,
  RangeError = 5,
  UnsafeVoltage = 6,
  DimensionMismatch = 7,
};

class Error : public std::runtime_error {
public:
  Error(Status status, const std::string& what)
      : std::runtime_error(what), status_(status) {}

  [[nodiscard]] Status status() const noexcept { return status_; }

private:
  Status status_;
};

struct InvalidArgument : Error {
  explicit InvalidArgument(const std::string& what)
      : Error(Status::InvalidArgument, what) {}
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& what)
      : Error(Status::ConfigError, what) {}
};

// Requested resistance lies outside the device's [r_lrs, r_hrs] window.
struct TargetOutOfRange : Error {
  explicit TargetOutOfRange(const std::string& what)
      : Error(Status::RangeError, what) {}
};

// Requested weight exceeds what the complementary pair can realize.
struct WeightOutOfRange : Error {
  explicit WeightOutOfRange(const std::string& what)
      : Error(Status::RangeError, what) {}
};

// Input voltage beyond the +-1 V window that leaves device state untouched.
struct UnsafeInputVoltage : Error {
  explicit UnsafeInputVoltage(const std::string& what)
      : Error(Status::UnsafeVoltage, what) {}
};

struct DimensionMismatch : Error {
  explicit DimensionMismatch(const std::string& what)
      : Error(Status::DimensionMismatch, what) {}
};

// Training loss left the reals; usually a mis-scaled step size.
struct NonFiniteLoss : Error {
  explicit NonFiniteLoss(const std::string& what)
      : Error(Status::NumericError, what) {}
};

// A numeric cross-check failed, e.g. the circuit and weight forward routes
// drifted apart. Indicates corrupted state, not bad user input.
struct NumericError : Error {
  explicit NumericError(const std::string& what)
      : Error(Status::NumericError, what) {}
};

struct IoError : Error {
  explicit IoError(const std::string& what) : Error(Status::IoError, what) {}
};

}  // namespace memsim
