#include "vulnforge/tracefilter.hpp"

#include <algorithm>

#include "vulnforge/error.hpp"

namespace vulnforge {

SuffixBlacklist::SuffixBlacklist() : suffixes_{".md", ".rst", ".json", ".svg", ".ChangeLog", ".out"} {}

SuffixBlacklist::SuffixBlacklist(std::vector<std::string> suffixes) : suffixes_(std::move(suffixes)) {
  if (suffixes_.empty()) throw Error(ErrorKind::ConfigError, "suffix blacklist must not be empty");
}

bool SuffixBlacklist::blocked(std::string_view path) const {
  const auto slash = path.find_last_of('/');
  const auto name = slash == std::string_view::npos ? path : path.substr(slash + 1);
  return std::any_of(suffixes_.begin(), suffixes_.end(), [&](const std::string& s) { return name.ends_with(s); });
}

std::vector<std::string> suffix_filter(const std::vector<std::string>& paths, const SuffixBlacklist& blacklist) {
  std::vector<std::string> out;
  for (const auto& p : paths)
    if (!blacklist.blocked(p)) out.push_back(p);
  return out;
}

PathDictionary build_path_dictionary(const std::vector<Patch>& patches) {
  PathDictionary dict;
  for (const auto& patch : patches) {
    for (const auto& file : patch.files) {
      auto [it, inserted] = dict.try_emplace({patch.project, file.file_name}, patch.commit_date);
      if (!inserted) it->second = std::max(it->second, patch.commit_date);
    }
  }
  return dict;
}

void merge_path_dictionary(PathDictionary& into, const PathDictionary& from) {
  for (const auto& [key, date] : from) {
    auto [it, inserted] = into.try_emplace(key, date);
    if (!inserted) it->second = std::max(it->second, date);
  }
}

TraceDecision file_path_trace_filter(const ChangedFile& file, const Patch& patch, const PathDictionary& dict) {
  const auto it = dict.find({patch.project, file.file_name});
  if (it == dict.end())
    throw Error(ErrorKind::MissingDictEntry, patch.project + ":" + file.file_name + " is not in the path dictionary");
  return patch.commit_date < it->second ? TraceDecision::Retain : TraceDecision::Drop;
}

namespace {

bool touches_any(const CommitSummary& commit, const std::set<std::string>& paths) {
  return std::any_of(commit.files.begin(), commit.files.end(), [&](const std::string& f) { return paths.count(f); });
}

}  // namespace

std::optional<std::string> resolve_child_patch(const Patch& patch, const ProjectHistory& history,
                                               std::optional<int> window_days) {
  std::set<std::string> paths;
  for (const auto& f : patch.files) paths.insert(f.file_name);

  std::size_t start = 0;
  if (const auto r = history.rank(patch.commit_id)) {
    start = *r + 1;
  } else {
    while (start < history.size() && history.at_rank(start).date <= patch.commit_date) ++start;
  }
  for (std::size_t i = start; i < history.size(); ++i) {
    const CommitSummary& c = history.at_rank(i);
    if (window_days && c.date - patch.commit_date > std::chrono::days(*window_days)) break;
    if (c.id == patch.commit_id) continue;
    if (touches_any(c, paths)) return c.id;
  }
  return std::nullopt;
}

namespace {

bool adjacent_overlap(const Patch& patch, const std::optional<std::string>& child,
                      const std::set<std::string>& retained_files, const ProjectHistory& history) {
  std::set<std::string> candidates;
  for (const auto& f : patch.files)
    if (retained_files.count(f.file_name)) candidates.insert(f.file_name);
  if (candidates.empty()) return false;
  for (const auto* id : {&child, &patch.parent_patch}) {
    if (!*id) continue;
    if (const CommitSummary* c = history.find(**id); c && touches_any(*c, candidates)) return true;
  }
  return false;
}

}  // namespace

bool commit_time_trace_filter(const Patch& patch, const std::set<std::string>& retained_files,
                              const ProjectHistory& history) {
  return adjacent_overlap(patch, patch.child_patch, retained_files, history);
}

TraceOutcome trace_patch(const Patch& patch, const PathDictionary& dict, const ProjectHistory& history,
                         const SuffixBlacklist& blacklist, std::optional<int> window_days) {
  TraceOutcome out;
  for (const auto& f : patch.files) {
    if (blacklist.blocked(f.file_name)) continue;
    if (file_path_trace_filter(f, patch, dict) == TraceDecision::Retain) out.retained.insert(f.file_name);
  }
  out.child_patch = resolve_child_patch(patch, history, window_days);
  out.outdated = adjacent_overlap(patch, out.child_patch, out.retained, history);
  return out;
}

}  // namespace vulnforge
