#pragma once

#include <complex>
#include <stdexcept>
#include <string>

namespace spectori {

using Complex = std::complex<double>;

inline constexpr Complex kI{0.0, 1.0};
inline constexpr double kPi = 3.14159265358979323846;

enum class Family { Odd, Even };
enum class CurveSign { Plus, Minus };

enum class ErrorCode {
  RejectCollision,
  RejectRange,
  RejectConjugacy,
  UnitModulus,
  OffCurve,
  NearBranch,
  SeedOffCurve,
  NoConvergence,
  WrongDegree,
  Clearance,
  Degenerate,
  TooSmall,
  SingularSystem,
  RepeatedZeta,
  RankDeficient,
  MobiusPole,
  StepTooSmall,
  ZeroVector,
  NoProgress,
  LeftModuli,
  MaxIter,
  NotRational,
  Overflow,
  Parse,
  Io,
};

inline const char* to_string(ErrorCode c) {
  switch (c) {
    case ErrorCode::RejectCollision: return "REJECT_COLLISION";
    case ErrorCode::RejectRange: return "REJECT_RANGE";
    case ErrorCode::RejectConjugacy: return "REJECT_CONJUGACY";
    case ErrorCode::UnitModulus: return "UNIT_MODULUS";
    case ErrorCode::OffCurve: return "OFF_CURVE";
    case ErrorCode::NearBranch: return "NEAR_BRANCH";
    case ErrorCode::SeedOffCurve: return "SEED_OFF_CURVE";
    case ErrorCode::NoConvergence: return "NO_CONVERGENCE";
    case ErrorCode::WrongDegree: return "WRONG_DEGREE";
    case ErrorCode::Clearance: return "CLEARANCE";
    case ErrorCode::Degenerate: return "DEGENERATE";
    case ErrorCode::TooSmall: return "TOO_SMALL";
    case ErrorCode::SingularSystem: return "SINGULAR_SYSTEM";
    case ErrorCode::RepeatedZeta: return "REPEATED_ZETA";
    case ErrorCode::RankDeficient: return "RANK_DEFICIENT";
    case ErrorCode::MobiusPole: return "MOBIUS_POLE";
    case ErrorCode::StepTooSmall: return "STEP_TOO_SMALL";
    case ErrorCode::ZeroVector: return "ZERO_VECTOR";
    case ErrorCode::NoProgress: return "NO_PROGRESS";
    case ErrorCode::LeftModuli: return "LEFT_MODULI";
    case ErrorCode::MaxIter: return "MAX_ITER";
    case ErrorCode::NotRational: return "NOT_RATIONAL";
    case ErrorCode::Overflow: return "OVERFLOW";
    case ErrorCode::Parse: return "PARSE";
    case ErrorCode::Io: return "IO";
  }
  return "UNKNOWN";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline const char* to_string(Family f) { return f == Family::Odd ? "odd" : "even"; }
inline const char* to_string(CurveSign s) { return s == CurveSign::Plus ? "plus" : "minus"; }

}  // namespace spectori
