#pragma once

#include <stdexcept>
#include <string>

namespace toboggan {

enum class ErrorKind {
  InvalidArgument,
  CriticalProximity,
  RefinementExhausted,
  OriginSingularity,
  RayGrazing,
  NotPTSymmetric,
  NonReducible,
  PoleProximity,
  StepUnderflow,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::CriticalProximity: return "CriticalProximity";
    case ErrorKind::RefinementExhausted: return "RefinementExhausted";
    case ErrorKind::OriginSingularity: return "OriginSingularity";
    case ErrorKind::RayGrazing: return "RayGrazing";
    case ErrorKind::NotPTSymmetric: return "NotPTSymmetric";
    case ErrorKind::NonReducible: return "NonReducible";
    case ErrorKind::PoleProximity: return "PoleProximity";
    case ErrorKind::StepUnderflow: return "StepUnderflow";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the kinds above so
/// callers (the CLI in particular) can map it to an exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace toboggan
