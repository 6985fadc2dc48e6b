#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "vulnforge/git.hpp"
#include "vulnforge/types.hpp"

namespace vulnforge {

class SuffixBlacklist {
 public:
  /// .md, .rst, .json, .svg, .ChangeLog, .out
  SuffixBlacklist();
  /// Throws Error{ConfigError} on an empty list.
  explicit SuffixBlacklist(std::vector<std::string> suffixes);

  /// Case-sensitive match on the final path component.
  bool blocked(std::string_view path) const;
  const std::vector<std::string>& suffixes() const { return suffixes_; }

 private:
  std::vector<std::string> suffixes_;
};

std::vector<std::string> suffix_filter(const std::vector<std::string>& paths, const SuffixBlacklist& blacklist);

/// (project, path) -> latest commit date among the collected patches.
using PathDictionary = std::map<std::pair<std::string, std::string>, Timestamp>;

PathDictionary build_path_dictionary(const std::vector<Patch>& patches);
/// Max-merge of `from` into `into`.
void merge_path_dictionary(PathDictionary& into, const PathDictionary& from);

enum class TraceDecision { Retain, Drop };

/// Retain iff the patch predates the latest touch of the path.
/// Throws Error{MissingDictEntry} for unregistered paths.
TraceDecision file_path_trace_filter(const ChangedFile& file, const Patch& patch, const PathDictionary& dict);

/// Earliest later commit (timestamp, then topological order) whose changed
/// files intersect the patch's, optionally within `window_days`.
std::optional<std::string> resolve_child_patch(const Patch& patch, const ProjectHistory& history,
                                               std::optional<int> window_days = std::nullopt);

/// True iff a retained file of the patch is also changed by its parent or
/// child commit.
bool commit_time_trace_filter(const Patch& patch, const std::set<std::string>& retained_files,
                              const ProjectHistory& history);

struct TraceOutcome {
  std::set<std::string> retained;
  std::optional<std::string> child_patch;
  bool outdated = false;
};

/// Runs both filters: suffix and path-dictionary screening, child
/// resolution and the parent/child overlap test.
TraceOutcome trace_patch(const Patch& patch, const PathDictionary& dict, const ProjectHistory& history,
                         const SuffixBlacklist& blacklist, std::optional<int> window_days = std::nullopt);

}  // namespace vulnforge
