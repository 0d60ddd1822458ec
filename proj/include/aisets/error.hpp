#pragma once

#include <stdexcept>
#include <string>

namespace aisets {

enum class ErrorKind {
  InvalidArgument,
  BoundViolation,      // coefficient or density outside its admissible range
  DegenerateChannel,   // determinant bound violated
  DegenerateDensity,   // law has no bounded density (atomic, zero width)
  PrecisionExhausted,  // quantization cell below floating-point resolution
  InstanceTooLarge,    // exhaustive budget exceeded
  MalformedMapping,    // image mapping not total or not deterministic
  InsufficientData,    // too few points for a fit
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace aisets
