#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "vulnforge/types.hpp"

namespace vulnforge {

struct CallSite {
  std::string name;
  int line = 1;
  friend bool operator==(const CallSite&, const CallSite&) = default;
};

struct FunctionInfo {
  std::string name;
  LineSpan span;
  std::vector<CallSite> calls;  // source order
  friend bool operator==(const FunctionInfo&, const FunctionInfo&) = default;
};

struct FileIndex {
  std::string path;
  Language language = Language::Other;
  std::vector<FunctionInfo> functions;  // top-level functions, source order
};

struct ParseReport {
  std::string file;
  std::string message;
};

/// Extracts top-level functions (including class methods) with their call
/// sites. Functions nested inside another function (lambdas, local classes,
/// inner defs) are folded into the enclosing top-level function.
/// Throws Error{ParseFailure} on unbalanced braces or unterminated
/// comments and strings.
FileIndex parse_source(std::string path, std::string_view content, Language language);

/// Immutable once built. Call resolution is purely name based.
class SyntaxIndex {
 public:
  SyntaxIndex() = default;

  /// Adds (or replaces) a file. `content` is kept for function_text().
  void add(FileIndex file, std::string content);
  void add_failure(ParseReport report);

  const FileIndex* file(const std::string& path) const;
  const std::map<std::string, FileIndex>& files() const { return files_; }
  const std::vector<ParseReport>& errors() const { return errors_; }

  /// Every top-level function with this name, in (file, line) order.
  const std::vector<FunctionRef>& functions_named(const std::string& name) const;
  /// Every function whose call sites include `name`.
  const std::vector<FunctionRef>& callers_of(const std::string& name) const;
  const FunctionInfo* lookup(const FunctionRef& ref) const;
  std::size_t function_count() const { return function_count_; }
  /// Source text of the function (its full line span).
  std::string function_text(const FunctionRef& ref) const;

 private:
  void remove(const std::string& path);

  std::map<std::string, FileIndex> files_;
  std::map<std::string, std::string> contents_;
  std::vector<ParseReport> errors_;
  std::map<std::string, std::vector<FunctionRef>> by_name_;
  std::map<std::string, std::vector<FunctionRef>> callers_;
  std::size_t function_count_ = 0;
};

/// Indexes every file of the snapshot whose language is in `language`'s
/// family. Parse failures are reported and the file is indexed as empty.
SyntaxIndex build_syntax_index(const RepoSnapshot& snapshot, Language language);

/// Slices lines [span.start, span.end] out of `content`.
std::string slice_lines(std::string_view content, LineSpan span);

FunctionRef make_ref(const FileIndex& file, const FunctionInfo& fn);

}  // namespace vulnforge
