#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "vulnforge/types.hpp"

namespace vulnforge {

inline constexpr std::string_view kCppcheck = "Cppcheck";
inline constexpr std::string_view kFlawfinder = "Flawfinder";
inline constexpr std::string_view kRats = "RATS";
inline constexpr std::string_view kSemgrep = "Semgrep";

/// Language -> ordered analyzer names.
struct AnalyzerMatrix {
  std::map<Language, std::vector<std::string>> tools;

  /// C/C++: Cppcheck, Flawfinder, RATS, Semgrep. Python: RATS, Semgrep.
  /// Java: Semgrep.
  static AnalyzerMatrix standard();
  /// Empty for unmapped languages.
  const std::vector<std::string>& for_language(Language lang) const;
};

class Analyzer {
 public:
  virtual ~Analyzer() = default;
  virtual std::string name() const = 0;
  /// `path` is repository-relative and is copied into every Finding.
  /// Throws Error{ProcessError} when the tool cannot run.
  virtual std::vector<Finding> analyze(const std::string& path, std::string_view content) = 0;
};

class AnalyzerRegistry {
 public:
  void add(std::shared_ptr<Analyzer> analyzer);
  std::shared_ptr<Analyzer> find(const std::string& name) const;

 private:
  std::map<std::string, std::shared_ptr<Analyzer>> analyzers_;
};

struct AnalyzerFailure {
  std::string tool;
  std::string message;
};

struct AnalysisResult {
  std::vector<Finding> findings;  // union over tools, in matrix order
  std::vector<std::string> ran;
  std::vector<AnalyzerFailure> failures;
};

/// Runs every analyzer mapped to the file's language over code_before.
/// A failing tool is recorded and skipped; if every mapped tool fails the
/// call throws Error{AllAnalyzersFailed}. Unmapped languages run nothing.
AnalysisResult run_analyzers(const ChangedFile& file, const AnalyzerMatrix& matrix, const AnalyzerRegistry& registry);

/// Related iff some finding lies within `slack` lines of a Delete or Context
/// line of the file's hunks.
StaticVerdict match_findings_to_changes(const std::vector<Finding>& findings, const ChangedFile& file, int slack = 0);

/// NotApplicable when no analyzer ran, else match_findings_to_changes.
StaticVerdict static_verdict(const AnalysisResult& result, const ChangedFile& file, int slack = 0);

/// Flags calls to any listed function (`name` followed by `(`), outside
/// comments and string literals.
class MockAnalyzer : public Analyzer {
 public:
  MockAnalyzer(std::string name, std::vector<std::string> dangerous);
  std::string name() const override { return name_; }
  std::vector<Finding> analyze(const std::string& path, std::string_view content) override;

 private:
  std::string name_;
  std::vector<std::string> dangerous_;
};

std::vector<std::string> default_dangerous_functions();

// Native output parsers. `path` replaces the temporary file name the tool saw.
std::vector<Finding> parse_cppcheck_output(std::string_view text, const std::string& path);
std::vector<Finding> parse_flawfinder_csv(std::string_view text, const std::string& path);
std::vector<Finding> parse_rats_output(std::string_view text, const std::string& path);
std::vector<Finding> parse_semgrep_json(std::string_view text, const std::string& path);

/// Subprocess adapter: writes the content to a scratch directory under its
/// original file name, runs the tool and parses its output.
class ToolAnalyzer : public Analyzer {
 public:
  enum class Kind { Cppcheck, Flawfinder, Rats, Semgrep };
  ToolAnalyzer(Kind kind, std::string binary, std::string semgrep_config = "auto");
  std::string name() const override;
  std::vector<Finding> analyze(const std::string& path, std::string_view content) override;

 private:
  Kind kind_;
  std::string binary_;
  std::string semgrep_config_;
};

/// Mock adapters registered under the four tool names.
AnalyzerRegistry mock_registry(const std::vector<std::string>& dangerous = default_dangerous_functions());

}  // namespace vulnforge
