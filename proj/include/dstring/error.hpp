#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dstring {

enum class ErrorKind {
  InvalidArgument,
  OverdampedMode,
  NonIntegrableCoupling,
  CutoffRequired,
  CutoffExceeded,
  GridTooCoarse,
  QuadratureDivergence,
  StepTooLarge,
  WindowOutsideRun,
  RecurrenceContamination,
  ConfigParse,
  Io,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::OverdampedMode: return "OverdampedMode";
    case ErrorKind::NonIntegrableCoupling: return "NonIntegrableCoupling";
    case ErrorKind::CutoffRequired: return "CutoffRequired";
    case ErrorKind::CutoffExceeded: return "CutoffExceeded";
    case ErrorKind::GridTooCoarse: return "GridTooCoarse";
    case ErrorKind::QuadratureDivergence: return "QuadratureDivergence";
    case ErrorKind::StepTooLarge: return "StepTooLarge";
    case ErrorKind::WindowOutsideRun: return "WindowOutsideRun";
    case ErrorKind::RecurrenceContamination: return "RecurrenceContamination";
    case ErrorKind::ConfigParse: return "ConfigParse";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the kinds above so the
/// CLI can map it onto an exit code.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool condition, ErrorKind kind, const std::string& what) {
  if (!condition) fail(kind, what);
}

}  // namespace dstring
