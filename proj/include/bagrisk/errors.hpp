#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace bagrisk {

enum class ErrorCode {
  CycleDetected,
  InvalidProbability,
  DanglingEdge,
  DuplicateEdge,
  InvalidId,
  InvalidPrior,
  InvalidEdge,
  NotInitialNode,
  EmptyParentList,
  InvalidFactor,
  ScopeOverflow,
  VarNotInScope,
  ZeroMass,
  TooLarge,
  ImpossibleEvidence,
  NotATree,
  UnknownNode,
  InvalidSpec,
  ResourceCap,
  ParseError,
  UnknownGraph,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::CycleDetected: return "CycleDetected";
    case ErrorCode::InvalidProbability: return "InvalidProbability";
    case ErrorCode::DanglingEdge: return "DanglingEdge";
    case ErrorCode::DuplicateEdge: return "DuplicateEdge";
    case ErrorCode::InvalidId: return "InvalidId";
    case ErrorCode::InvalidPrior: return "InvalidPrior";
    case ErrorCode::InvalidEdge: return "InvalidEdge";
    case ErrorCode::NotInitialNode: return "NotInitialNode";
    case ErrorCode::EmptyParentList: return "EmptyParentList";
    case ErrorCode::InvalidFactor: return "InvalidFactor";
    case ErrorCode::ScopeOverflow: return "ScopeOverflow";
    case ErrorCode::VarNotInScope: return "VarNotInScope";
    case ErrorCode::ZeroMass: return "ZeroMass";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::ImpossibleEvidence: return "ImpossibleEvidence";
    case ErrorCode::NotATree: return "NotATree";
    case ErrorCode::UnknownNode: return "UnknownNode";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::ResourceCap: return "ResourceCap";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::UnknownGraph: return "UnknownGraph";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above so
/// callers (CLI, HTTP layer) can map it without parsing messages.
class BagError : public std::runtime_error {
 public:
  BagError(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace bagrisk
