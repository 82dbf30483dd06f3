#include "rocq/common/error.hpp"

namespace rocq {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidConfig: return "InvalidConfig";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::CompilerNotFound: return "CompilerNotFound";
    case ErrorKind::SpawnFailure: return "SpawnFailure";
    case ErrorKind::Unscripted: return "Unscripted";
    case ErrorKind::BackendUnavailable: return "BackendUnavailable";
    case ErrorKind::NameNotFound: return "NameNotFound";
    case ErrorKind::MultipleDefinitions: return "MultipleDefinitions";
    case ErrorKind::MalformedAssumptionBlock: return "MalformedAssumptionBlock";
    case ErrorKind::TheoremNotFound: return "TheoremNotFound";
    case ErrorKind::EngineStartFailure: return "EngineStartFailure";
    case ErrorKind::EngineCrash: return "EngineCrash";
    case ErrorKind::SessionClosed: return "SessionClosed";
    case ErrorKind::TooManyTactics: return "TooManyTactics";
    case ErrorKind::InvalidQueryKind: return "InvalidQueryKind";
    case ErrorKind::QueryFailed: return "QueryFailed";
    case ErrorKind::FileNotFound: return "FileNotFound";
    case ErrorKind::NotationUnknown: return "NotationUnknown";
    case ErrorKind::SchemaViolation: return "SchemaViolation";
    case ErrorKind::NoReadableInput: return "NoReadableInput";
    case ErrorKind::EmptyStream: return "EmptyStream";
    case ErrorKind::UnassignedProblem: return "UnassignedProblem";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

void raise(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace rocq
