#pragma once

#include <stdexcept>
#include <string>

namespace shadowlab {

enum class ErrorKind {
  RankDeficient,
  DomainError,
  NotUnit,
  ZeroDirection,
  NonConvergence,
  Degenerate,
  DimensionError,
  OrbitStabilizerMismatch,
  ModeUnsupported,
  UnknownBody,
  BadParams,
  ConfigError,
  IoError,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::RankDeficient: return "RankDeficient";
    case ErrorKind::DomainError: return "DomainError";
    case ErrorKind::NotUnit: return "NotUnit";
    case ErrorKind::ZeroDirection: return "ZeroDirection";
    case ErrorKind::NonConvergence: return "NonConvergence";
    case ErrorKind::Degenerate: return "Degenerate";
    case ErrorKind::DimensionError: return "DimensionError";
    case ErrorKind::OrbitStabilizerMismatch: return "OrbitStabilizerMismatch";
    case ErrorKind::ModeUnsupported: return "ModeUnsupported";
    case ErrorKind::UnknownBody: return "UnknownBody";
    case ErrorKind::BadParams: return "BadParams";
    case ErrorKind::ConfigError: return "ConfigError";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

// Single exception type; the kind is what callers dispatch on.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace shadowlab
