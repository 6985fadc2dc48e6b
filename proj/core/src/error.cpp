#include "vulnforge/error.hpp"

namespace vulnforge {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::MalformedEntry: return "MalformedEntry";
    case ErrorKind::InvariantViolation: return "InvariantViolation";
    case ErrorKind::SourceUnreadable: return "SourceUnreadable";
    case ErrorKind::CommitNotFound: return "CommitNotFound";
    case ErrorKind::MergeCommit: return "MergeCommit";
    case ErrorKind::EmptyChange: return "EmptyChange";
    case ErrorKind::ClientError: return "ClientError";
    case ErrorKind::AllAnalyzersFailed: return "AllAnalyzersFailed";
    case ErrorKind::ParseFailure: return "ParseFailure";
    case ErrorKind::MissingDictEntry: return "MissingDictEntry";
    case ErrorKind::IncompleteStage: return "IncompleteStage";
    case ErrorKind::ConfigError: return "ConfigError";
    case ErrorKind::IoError: return "IoError";
    case ErrorKind::ProcessError: return "ProcessError";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

}  // namespace vulnforge
