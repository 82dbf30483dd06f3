#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rocq {

// Every failure the library reports through exceptions carries one of these
// kinds. The tool server surfaces the kind name verbatim as `error_kind`.
enum class ErrorKind {
  InvalidConfig,
  InvalidArgument,
  CompilerNotFound,
  SpawnFailure,
  Unscripted,
  BackendUnavailable,
  NameNotFound,
  MultipleDefinitions,
  MalformedAssumptionBlock,
  TheoremNotFound,
  EngineStartFailure,
  EngineCrash,
  SessionClosed,
  TooManyTactics,
  InvalidQueryKind,
  QueryFailed,
  FileNotFound,
  NotationUnknown,
  SchemaViolation,
  NoReadableInput,
  EmptyStream,
  UnassignedProblem,
  Io,
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] void raise(ErrorKind kind, const std::string& message);

}  // namespace rocq
