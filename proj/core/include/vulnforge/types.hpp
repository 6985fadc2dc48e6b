#pragma once

#include <chrono>
#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace vulnforge {

// All dates are UTC; date-only inputs resolve to midnight.
using Timestamp = std::chrono::sys_seconds;

/// Accepts "YYYY-MM-DD", "YYYY-MM-DD[T ]HH:MM[:SS][Z|+HH:MM|-HH:MM]" and
/// plain epoch seconds. Throws Error{MalformedEntry} otherwise.
Timestamp parse_timestamp(std::string_view text);
std::string format_timestamp(Timestamp ts);
std::string format_date(Timestamp ts);
int year_of(Timestamp ts);

enum class Language { C, Cpp, Java, Python, Other };

std::string_view to_string(Language lang);
/// Accepts the canonical names plus the CLI spellings (c, cpp, c++, java, python, py).
std::optional<Language> parse_language(std::string_view text);
bool is_supported(Language lang);
/// C and C++ share headers, so they are analysed as one family.
bool same_family(Language a, Language b);

enum class LlmVerdict { Yes, No, Unknown };
enum class StaticVerdict { Related, Unrelated, NotApplicable };
enum class JointVerdict { Related, Unrelated, Excluded };
enum class ChangeKind { Add, Delete, Context };
enum class Version { Before, After };
enum class Direction { Caller = 0, Callee = 1 };

enum class Label : std::uint8_t { NonVulnerable = 0, Vulnerable = 1 };

std::string_view to_string(LlmVerdict v);
std::string_view to_string(StaticVerdict v);
std::string_view to_string(JointVerdict v);
std::string_view to_string(ChangeKind k);
std::string_view to_string(Version v);
std::string_view to_string(Direction d);

std::optional<LlmVerdict> parse_llm_verdict(std::string_view text);
std::optional<StaticVerdict> parse_static_verdict(std::string_view text);
std::optional<JointVerdict> parse_joint_verdict(std::string_view text);
std::optional<ChangeKind> parse_change_kind(std::string_view text);
std::optional<Version> parse_version(std::string_view text);
std::optional<Direction> parse_direction(std::string_view text);

inline int to_int(Label label) { return static_cast<int>(label); }
std::optional<Label> label_from_int(long long value);

/// Inclusive 1-based line range.
struct LineSpan {
  int start = 1;
  int end = 1;

  bool contains(int line) const { return line >= start && line <= end; }
  bool intersects(const LineSpan& other) const {
    return start <= other.end && other.start <= end;
  }
  friend auto operator<=>(const LineSpan&, const LineSpan&) = default;
};

struct CommitRef {
  std::string project;
  std::string commit_id;
  friend bool operator==(const CommitRef&, const CommitRef&) = default;
};

struct VulnEntry {
  std::string cve_id;
  std::string cwe_id;
  Language language = Language::C;
  std::vector<std::string> resources;
  std::string cve_description;
  Timestamp publish_date{};
  double cvss = 0.0;
  std::string av, ac, pr, ui, s, c, i, a;
  std::string cwe_description;
  std::string cwe_solution;
  std::string cwe_consequence;
  std::string cwe_method;
  std::vector<CommitRef> commits;

  friend bool operator==(const VulnEntry&, const VulnEntry&) = default;
};

struct LineChange {
  ChangeKind kind = ChangeKind::Context;
  std::string content;
  int line_number = 1;
  // False only for the final line of a text lacking a trailing newline.
  bool newline = true;

  friend bool operator==(const LineChange&, const LineChange&) = default;
};

struct Hunk {
  int before_start = 0;
  int before_len = 0;
  int after_start = 0;
  int after_len = 0;
  std::vector<LineChange> lines;

  friend bool operator==(const Hunk&, const Hunk&) = default;
};

struct ChangedFile {
  std::string file_name;
  Language file_language = Language::Other;
  std::string code_before;
  std::string code_after;
  std::vector<Hunk> code_change;
  std::string html_url;
  LlmVerdict llm_verdict = LlmVerdict::Unknown;
  StaticVerdict static_verdict = StaticVerdict::NotApplicable;
  // Unset until the untangling stage has run.
  std::optional<JointVerdict> joint;
  // Label of the before-fix version.
  Label target = Label::NonVulnerable;

  friend bool operator==(const ChangedFile&, const ChangedFile&) = default;
};

struct Patch {
  std::string commit_id;
  std::string commit_message;
  Timestamp commit_date{};
  std::string project;
  std::optional<std::string> parent_patch;
  std::optional<std::string> child_patch;
  std::string url;
  std::string html_url;
  std::vector<ChangedFile> files;
  bool outdated = false;

  friend bool operator==(const Patch&, const Patch&) = default;
};

struct FunctionRef {
  std::string file;
  std::string name;
  LineSpan span;

  friend auto operator<=>(const FunctionRef&, const FunctionRef&) = default;
};

struct FunctionRecord {
  std::string name;
  std::string file;
  LineSpan span;
  std::string content;
  bool changed = false;
  Label target = Label::NonVulnerable;
  Version version = Version::Before;

  friend bool operator==(const FunctionRecord&, const FunctionRecord&) = default;
};

struct Finding {
  std::string tool;
  std::string file;
  int line = 1;
  std::string rule_id;
  std::string severity;
  std::string message;

  friend bool operator==(const Finding&, const Finding&) = default;
};

struct RootSnippet {
  std::string file;
  LineSpan lines;
  friend bool operator==(const RootSnippet&, const RootSnippet&) = default;
};

struct TreeNode {
  FunctionRef ref;
  int depth = 0;
  friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

// Callee trees point edges caller -> callee. Caller trees point them
// callee -> caller, so both kinds are reachable from their depth-0 roots.
struct CallTree {
  Direction direction = Direction::Callee;
  RootSnippet root_snippet;
  std::vector<std::string> root_apis;
  std::vector<TreeNode> nodes;  // breadth-first order, roots first
  std::vector<std::pair<FunctionRef, FunctionRef>> edges;  // sorted, unique
  int depth_limit = 5;

  friend bool operator==(const CallTree&, const CallTree&) = default;
};

struct RepositoryContext {
  CallTree tree;
  std::string code;
  Label target = Label::NonVulnerable;
  friend bool operator==(const RepositoryContext&, const RepositoryContext&) = default;
};

struct LineRecord {
  std::string file;
  LineChange change;
  friend bool operator==(const LineRecord&, const LineRecord&) = default;
};

struct DatasetRecord {
  VulnEntry entry;
  Patch patch;
  std::vector<RepositoryContext> repository_level;
  std::vector<ChangedFile> file_level;
  std::vector<FunctionRecord> function_level;
  std::vector<LineRecord> line_level;

  friend bool operator==(const DatasetRecord&, const DatasetRecord&) = default;
};

bool is_valid_cve_id(std::string_view id);
bool is_valid_cwe_id(std::string_view id);

/// Returns the entry unchanged when every invariant holds; throws
/// Error{MalformedEntry} naming the first violation otherwise.
VulnEntry validate_entry(VulnEntry entry);

// Invariant checks throw Error{InvariantViolation}.
void check_invariants(const LineChange& change);
void check_invariants(const Hunk& hunk);
void check_invariants(const ChangedFile& file);
void check_invariants(const Patch& patch);
void check_invariants(const FunctionRecord& record);
void check_invariants(const Finding& finding);
void check_invariants(const CallTree& tree);
void check_invariants(const DatasetRecord& record);

/// Path -> content of one repository state, restricted to the files of interest.
using RepoSnapshot = std::map<std::string, std::string>;

/// Number of lines in a text, counting a final unterminated line.
int count_lines(std::string_view text);

}  // namespace vulnforge
