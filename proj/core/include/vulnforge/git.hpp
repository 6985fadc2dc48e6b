#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "vulnforge/types.hpp"

namespace vulnforge {

struct CommitInfo {
  std::string id;
  std::vector<std::string> parents;
  Timestamp date{};
  std::string message;
};

struct TreeChange {
  char status = 'M';  // git status letter: A, M, D, T
  std::string path;
};

struct CommitSummary {
  std::string id;
  std::vector<std::string> parents;
  Timestamp date{};
  std::vector<std::string> files;
};

/// Read-only access to one repository through the system git binary.
/// Not thread-safe per instance; distinct repositories can be used
/// concurrently.
class GitRepository {
 public:
  /// Throws Error{SourceUnreadable} if `path` is not a git repository.
  explicit GitRepository(std::filesystem::path path);

  const std::filesystem::path& path() const { return path_; }

  std::optional<std::string> resolve_commit(const std::string& rev) const;
  /// Throws Error{CommitNotFound}.
  CommitInfo commit_info(const std::string& rev) const;
  /// Blob changes between `parent` (or the empty tree) and `id`. Gitlinks
  /// are skipped.
  std::vector<TreeChange> changed_files(const std::string& id,
                                        const std::optional<std::string>& parent) const;
  std::optional<std::string> read_blob(const std::string& commit, const std::string& path) const;
  /// Batch read through a single `git cat-file --batch`; absent paths are
  /// omitted from the result.
  std::map<std::string, std::string> read_blobs(const std::string& commit,
                                                const std::vector<std::string>& paths) const;
  std::vector<std::string> list_files(const std::string& commit) const;
  /// Every commit reachable from any ref, parents before children.
  std::vector<CommitSummary> history() const;

 private:
  std::vector<std::string> git_args(std::initializer_list<std::string> args) const;

  std::filesystem::path path_;
};

/// History of one project with commit-time ordering. Commits sharing a
/// timestamp keep their topological order.
class ProjectHistory {
 public:
  ProjectHistory() = default;
  explicit ProjectHistory(std::vector<CommitSummary> topo_ordered);

  const std::vector<CommitSummary>& commits() const { return commits_; }
  const CommitSummary* find(const std::string& id) const;
  /// Position in (timestamp, topological rank) order.
  std::optional<std::size_t> rank(const std::string& id) const;
  /// i-th commit in (timestamp, topological rank) order.
  const CommitSummary& at_rank(std::size_t i) const { return commits_[chronological_[i]]; }
  std::size_t size() const { return commits_.size(); }

 private:
  std::vector<CommitSummary> commits_;
  std::vector<std::size_t> chronological_;
  std::unordered_map<std::string, std::size_t> by_id_;
  std::unordered_map<std::string, std::size_t> rank_;
};

}  // namespace vulnforge
