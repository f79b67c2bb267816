#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rklab {

enum class ErrorCode {
  PoleHit,
  TailUnbounded,
  DomainError,
  NonPositiveResidue,
  MajorantMissing,
  SystemMismatch,
  DegenerateGram,
  NotAZero,
  NormalizerVanishes,
  MembershipFailed,
  NotSummable,
  SparsificationFailed,
  ScheduleTooLarge,
  IllConditioned,
  NotCaratheodoryAtInfinity,
  ZeroAccumulation,
  DegreeUnknown,
  MassAtInfinity,
  ConditionViolated,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::PoleHit: return "PoleHit";
    case ErrorCode::TailUnbounded: return "TailUnbounded";
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::NonPositiveResidue: return "NonPositiveResidue";
    case ErrorCode::MajorantMissing: return "MajorantMissing";
    case ErrorCode::SystemMismatch: return "SystemMismatch";
    case ErrorCode::DegenerateGram: return "DegenerateGram";
    case ErrorCode::NotAZero: return "NotAZero";
    case ErrorCode::NormalizerVanishes: return "NormalizerVanishes";
    case ErrorCode::MembershipFailed: return "MembershipFailed";
    case ErrorCode::NotSummable: return "NotSummable";
    case ErrorCode::SparsificationFailed: return "SparsificationFailed";
    case ErrorCode::ScheduleTooLarge: return "ScheduleTooLarge";
    case ErrorCode::IllConditioned: return "IllConditioned";
    case ErrorCode::NotCaratheodoryAtInfinity: return "NotCaratheodoryAtInfinity";
    case ErrorCode::ZeroAccumulation: return "ZeroAccumulation";
    case ErrorCode::DegreeUnknown: return "DegreeUnknown";
    case ErrorCode::MassAtInfinity: return "MassAtInfinity";
    case ErrorCode::ConditionViolated: return "ConditionViolated";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace rklab
