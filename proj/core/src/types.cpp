#include "vulnforge/types.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <map>
#include <queue>
#include <regex>
#include <set>

#include "vulnforge/error.hpp"

namespace vulnforge {

namespace {

std::string lower(std::string_view text) {
  std::string out(text);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

[[noreturn]] void malformed_time(std::string_view text) {
  throw Error(ErrorKind::MalformedEntry, "unparseable date '" + std::string(text) + "'");
}

bool parse_int(std::string_view text, int& out) {
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc{} && ptr == text.data() + text.size();
}

[[noreturn]] void violation(const std::string& what) {
  throw Error(ErrorKind::InvariantViolation, what);
}

}  // namespace

Timestamp parse_timestamp(std::string_view text) {
  using namespace std::chrono;
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.remove_suffix(1);
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) text.remove_prefix(1);
  if (text.empty()) malformed_time(text);

  if (std::all_of(text.begin(), text.end(), [](unsigned char c) { return std::isdigit(c); }) &&
      text.size() != 8) {
    long long secs = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), secs);
    if (ec != std::errc{}) malformed_time(text);
    return Timestamp{seconds{secs}};
  }

  static const std::regex pattern(
      R"(^(\d{4})-(\d{2})-(\d{2})(?:[T ](\d{2}):(\d{2})(?::(\d{2})(?:\.\d+)?)?)?\s*(Z|[+-]\d{2}:?\d{2})?$)");
  std::cmatch m;
  if (!std::regex_match(text.data(), text.data() + text.size(), m, pattern)) malformed_time(text);

  int y = 0, mo = 0, d = 0, hh = 0, mi = 0, ss = 0;
  parse_int(std::string_view(m[1].first, m[1].length()), y);
  parse_int(std::string_view(m[2].first, m[2].length()), mo);
  parse_int(std::string_view(m[3].first, m[3].length()), d);
  if (m[4].matched) parse_int(std::string_view(m[4].first, m[4].length()), hh);
  if (m[5].matched) parse_int(std::string_view(m[5].first, m[5].length()), mi);
  if (m[6].matched) parse_int(std::string_view(m[6].first, m[6].length()), ss);

  year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || hh > 23 || mi > 59 || ss > 60) malformed_time(text);

  Timestamp ts = sys_days{ymd} + hours{hh} + minutes{mi} + seconds{ss};
  if (m[7].matched && m[7].str() != "Z") {
    std::string off = m[7].str();
    off.erase(std::remove(off.begin(), off.end(), ':'), off.end());
    int oh = 0, om = 0;
    parse_int(std::string_view(off).substr(1, 2), oh);
    parse_int(std::string_view(off).substr(3, 2), om);
    seconds offset = hours{oh} + minutes{om};
    ts = off[0] == '+' ? ts - offset : ts + offset;
  }
  return ts;
}

std::string format_timestamp(Timestamp ts) {
  using namespace std::chrono;
  auto days = floor<std::chrono::days>(ts);
  year_month_day ymd{days};
  hh_mm_ss hms{ts - days};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<int>(hms.hours().count()), static_cast<int>(hms.minutes().count()),
                static_cast<int>(hms.seconds().count()));
  return buf;
}

std::string format_date(Timestamp ts) { return format_timestamp(ts).substr(0, 10); }

int year_of(Timestamp ts) {
  using namespace std::chrono;
  return static_cast<int>(year_month_day{floor<days>(ts)}.year());
}

std::string_view to_string(Language lang) {
  switch (lang) {
    case Language::C: return "C";
    case Language::Cpp: return "C++";
    case Language::Java: return "Java";
    case Language::Python: return "Python";
    case Language::Other: return "Other";
  }
  return "Other";
}

std::optional<Language> parse_language(std::string_view text) {
  const std::string l = lower(text);
  if (l == "c") return Language::C;
  if (l == "c++" || l == "cpp" || l == "cxx") return Language::Cpp;
  if (l == "java") return Language::Java;
  if (l == "python" || l == "py") return Language::Python;
  if (l == "other") return Language::Other;
  return std::nullopt;
}

bool is_supported(Language lang) { return lang != Language::Other; }

bool same_family(Language a, Language b) {
  auto family = [](Language l) { return l == Language::Cpp ? Language::C : l; };
  return family(a) == family(b);
}

std::string_view to_string(LlmVerdict v) {
  switch (v) {
    case LlmVerdict::Yes: return "YES";
    case LlmVerdict::No: return "NO";
    case LlmVerdict::Unknown: return "UNKNOWN";
  }
  return "UNKNOWN";
}

std::string_view to_string(StaticVerdict v) {
  switch (v) {
    case StaticVerdict::Related: return "Related";
    case StaticVerdict::Unrelated: return "Unrelated";
    case StaticVerdict::NotApplicable: return "NotApplicable";
  }
  return "NotApplicable";
}

std::string_view to_string(JointVerdict v) {
  switch (v) {
    case JointVerdict::Related: return "Related";
    case JointVerdict::Unrelated: return "Unrelated";
    case JointVerdict::Excluded: return "Excluded";
  }
  return "Excluded";
}

std::string_view to_string(ChangeKind k) {
  switch (k) {
    case ChangeKind::Add: return "Add";
    case ChangeKind::Delete: return "Delete";
    case ChangeKind::Context: return "Context";
  }
  return "Context";
}

std::string_view to_string(Version v) { return v == Version::Before ? "Before" : "After"; }

std::string_view to_string(Direction d) { return d == Direction::Caller ? "Caller" : "Callee"; }

std::optional<LlmVerdict> parse_llm_verdict(std::string_view text) {
  if (text == "YES") return LlmVerdict::Yes;
  if (text == "NO") return LlmVerdict::No;
  if (text == "UNKNOWN") return LlmVerdict::Unknown;
  return std::nullopt;
}

std::optional<StaticVerdict> parse_static_verdict(std::string_view text) {
  if (text == "Related") return StaticVerdict::Related;
  if (text == "Unrelated") return StaticVerdict::Unrelated;
  if (text == "NotApplicable") return StaticVerdict::NotApplicable;
  return std::nullopt;
}

std::optional<JointVerdict> parse_joint_verdict(std::string_view text) {
  if (text == "Related") return JointVerdict::Related;
  if (text == "Unrelated") return JointVerdict::Unrelated;
  if (text == "Excluded") return JointVerdict::Excluded;
  return std::nullopt;
}

std::optional<ChangeKind> parse_change_kind(std::string_view text) {
  if (text == "Add") return ChangeKind::Add;
  if (text == "Delete") return ChangeKind::Delete;
  if (text == "Context") return ChangeKind::Context;
  return std::nullopt;
}

std::optional<Version> parse_version(std::string_view text) {
  if (text == "Before") return Version::Before;
  if (text == "After") return Version::After;
  return std::nullopt;
}

std::optional<Direction> parse_direction(std::string_view text) {
  if (text == "Caller") return Direction::Caller;
  if (text == "Callee") return Direction::Callee;
  return std::nullopt;
}

std::optional<Label> label_from_int(long long value) {
  if (value == 0) return Label::NonVulnerable;
  if (value == 1) return Label::Vulnerable;
  return std::nullopt;
}

bool is_valid_cve_id(std::string_view id) {
  static const std::regex pattern(R"(^CVE-\d{4}-\d+$)");
  return std::regex_match(id.begin(), id.end(), pattern);
}

bool is_valid_cwe_id(std::string_view id) {
  static const std::regex pattern(R"(^CWE-\d+$)");
  return id.empty() || std::regex_match(id.begin(), id.end(), pattern);
}

VulnEntry validate_entry(VulnEntry entry) {
  if (!is_valid_cve_id(entry.cve_id))
    throw Error(ErrorKind::MalformedEntry, "bad CVE id '" + entry.cve_id + "'");
  if (!is_valid_cwe_id(entry.cwe_id))
    throw Error(ErrorKind::MalformedEntry, entry.cve_id + ": bad CWE id '" + entry.cwe_id + "'");
  if (!(entry.cvss >= 0.0 && entry.cvss <= 10.0))
    throw Error(ErrorKind::MalformedEntry,
                entry.cve_id + ": CVSS " + std::to_string(entry.cvss) + " outside [0, 10]");
  if (!is_supported(entry.language))
    throw Error(ErrorKind::MalformedEntry, entry.cve_id + ": unsupported language");
  return entry;
}

int count_lines(std::string_view text) {
  if (text.empty()) return 0;
  int n = static_cast<int>(std::count(text.begin(), text.end(), '\n'));
  if (text.back() != '\n') ++n;
  return n;
}

void check_invariants(const LineChange& change) {
  if (change.line_number < 1) violation("line number must be >= 1");
}

void check_invariants(const Hunk& hunk) {
  int before = 0, after = 0;
  for (const auto& line : hunk.lines) {
    check_invariants(line);
    if (line.kind != ChangeKind::Add) ++before;
    if (line.kind != ChangeKind::Delete) ++after;
  }
  if (before != hunk.before_len || after != hunk.after_len)
    violation("hunk line counts disagree with its header");
  if (hunk.before_start < 0 || hunk.after_start < 0) violation("negative hunk start");
}

void check_invariants(const ChangedFile& file) {
  const int before_lines = count_lines(file.code_before);
  const int after_lines = count_lines(file.code_after);
  for (const auto& hunk : file.code_change) {
    check_invariants(hunk);
    for (const auto& line : hunk.lines) {
      const int limit = line.kind == ChangeKind::Add ? after_lines : before_lines;
      if (line.line_number > limit)
        violation(file.file_name + ": hunk references line " + std::to_string(line.line_number) +
                  " beyond " + std::to_string(limit));
    }
  }
  if (file.joint) {
    const bool related = *file.joint == JointVerdict::Related;
    if (related != (file.target == Label::Vulnerable))
      violation(file.file_name + ": target disagrees with joint verdict");
  }
}

void check_invariants(const Patch& patch) {
  if (patch.commit_id.empty()) violation("patch without commit id");
  if (patch.parent_patch && *patch.parent_patch == patch.commit_id)
    violation(patch.commit_id + " is its own parent");
  if (patch.child_patch && *patch.child_patch == patch.commit_id)
    violation(patch.commit_id + " is its own child");
  std::set<std::string> seen;
  for (const auto& f : patch.files) {
    if (!seen.insert(f.file_name).second) violation(patch.commit_id + ": duplicate path " + f.file_name);
    check_invariants(f);
  }
}

void check_invariants(const FunctionRecord& record) {
  if (record.span.start < 1 || record.span.start > record.span.end)
    violation(record.file + ":" + record.name + ": bad span");
  if (record.version == Version::After && record.target != Label::NonVulnerable)
    violation(record.file + ":" + record.name + ": after-version labelled vulnerable");
}

void check_invariants(const Finding& finding) {
  if (finding.line < 1) violation(finding.tool + ": finding line must be >= 1");
}

void check_invariants(const CallTree& tree) {
  if (tree.depth_limit < 1) violation("depth limit must be positive");
  std::map<FunctionRef, int> depth;
  for (const auto& node : tree.nodes) {
    if (node.depth < 0 || node.depth > tree.depth_limit) violation("node beyond depth limit");
    if (!depth.emplace(node.ref, node.depth).second) violation("duplicate tree node");
  }
  std::map<FunctionRef, std::vector<FunctionRef>> adjacency;
  for (const auto& [from, to] : tree.edges) {
    if (!depth.count(from) || !depth.count(to)) violation("edge leaves the node set");
    adjacency[from].push_back(to);
  }
  std::set<FunctionRef> reached;
  std::queue<FunctionRef> frontier;
  for (const auto& node : tree.nodes)
    if (node.depth == 0 && reached.insert(node.ref).second) frontier.push(node.ref);
  while (!frontier.empty()) {
    auto cur = frontier.front();
    frontier.pop();
    for (const auto& next : adjacency[cur])
      if (reached.insert(next).second) frontier.push(next);
  }
  if (reached.size() != depth.size()) violation("call tree not connected from its roots");
}

void check_invariants(const DatasetRecord& record) {
  check_invariants(record.patch);
  std::set<std::string> files;
  for (const auto& f : record.patch.files) files.insert(f.file_name);
  auto require = [&](const std::string& name) {
    if (!files.count(name)) violation(record.patch.commit_id + ": layer references unknown file " + name);
  };
  for (const auto& f : record.file_level) require(f.file_name);
  for (const auto& fn : record.function_level) {
    require(fn.file);
    check_invariants(fn);
  }
  for (const auto& line : record.line_level) require(line.file);
  for (const auto& ctx : record.repository_level) {
    require(ctx.tree.root_snippet.file);
    check_invariants(ctx.tree);
  }
}

}  // namespace vulnforge
