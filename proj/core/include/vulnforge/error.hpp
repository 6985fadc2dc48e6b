#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace vulnforge {

enum class ErrorKind {
  MalformedEntry,
  InvariantViolation,
  SourceUnreadable,
  CommitNotFound,
  MergeCommit,
  EmptyChange,
  ClientError,
  AllAnalyzersFailed,
  ParseFailure,
  MissingDictEntry,
  IncompleteStage,
  ConfigError,
  IoError,
  ProcessError,
};

std::string_view to_string(ErrorKind kind);

// Every failure raised by the library carries a kind so callers (and the CLI
// exit-code mapping) can branch without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace vulnforge
