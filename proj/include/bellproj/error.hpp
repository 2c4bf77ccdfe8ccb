#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace bellproj {

enum class ErrorKind {
  InvalidOperator,
  NotHermitian,
  NotUnitary,
  NotDensityMatrix,
  DimMismatch,
  BranchAmbiguity,
  AssignmentAmbiguity,
  ZeroTarget,
  ZeroSplitting,
  FinitePulse,
  DegenerateEigenvalues,
  DegenerateSpectrum,
  SearchFailed,
  RankDeficient,
  InvalidArgument,
  Config,
};

std::string_view to_string(ErrorKind kind);

// Every numerical failure carries the module that raised it so the CLI can
// report provenance alongside the exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string_view module, const std::string& what)
      : std::runtime_error(std::string(module) + ": " + std::string(to_string(kind)) + ": " + what),
        kind_(kind),
        module_(module) {}

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& module() const noexcept { return module_; }

 private:
  ErrorKind kind_;
  std::string module_;
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidOperator: return "InvalidOperator";
    case ErrorKind::NotHermitian: return "NotHermitian";
    case ErrorKind::NotUnitary: return "NotUnitary";
    case ErrorKind::NotDensityMatrix: return "NotDensityMatrix";
    case ErrorKind::DimMismatch: return "DimMismatch";
    case ErrorKind::BranchAmbiguity: return "BranchAmbiguity";
    case ErrorKind::AssignmentAmbiguity: return "AssignmentAmbiguity";
    case ErrorKind::ZeroTarget: return "ZeroTarget";
    case ErrorKind::ZeroSplitting: return "ZeroSplitting";
    case ErrorKind::FinitePulse: return "FinitePulse";
    case ErrorKind::DegenerateEigenvalues: return "DegenerateEigenvalues";
    case ErrorKind::DegenerateSpectrum: return "DegenerateSpectrum";
    case ErrorKind::SearchFailed: return "SearchFailed";
    case ErrorKind::RankDeficient: return "RankDeficient";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::Config: return "Config";
  }
  return "Unknown";
}

}  // namespace bellproj
