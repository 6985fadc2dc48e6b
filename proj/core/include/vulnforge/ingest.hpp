#pragma once

#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "vulnforge/git.hpp"
#include "vulnforge/types.hpp"

namespace vulnforge {

struct SourceConfig {
  std::filesystem::path entries_path;
  std::filesystem::path repos_root;
  std::optional<std::set<Language>> language_filter;
  int since_year = 2010;
};

struct LineError {
  std::size_t line = 0;  // 1-based line in the entries file
  std::string message;
};

struct EntryLoadResult {
  std::vector<VulnEntry> entries;
  std::vector<LineError> errors;
};

/// Reads the JSON-lines entries file. Entries come back sorted by
/// (publish_date, cve_id); entries published before `since_year` or outside
/// the language filter are dropped silently, malformed lines are reported.
/// Throws Error{SourceUnreadable} if the file cannot be opened.
EntryLoadResult load_entries(const SourceConfig& cfg);

/// Extension-based classification; undecodable content maps to Other.
Language detect_file_language(std::string_view path, std::string_view content = {});

/// Valid UTF-8 without NUL bytes.
bool is_text(std::string_view content);

/// Materializes a fixing commit: message, date, first parent and every
/// changed path with full before/after contents and hunks. The child patch
/// is left unset.
/// Throws Error{CommitNotFound} or Error{MergeCommit}.
Patch load_patch(const GitRepository& repo, const std::string& project, const std::string& commit_id);

/// Where patches, histories and repository snapshots come from.
class PatchSource {
 public:
  virtual ~PatchSource() = default;
  virtual Patch load_patch(const std::string& project, const std::string& commit_id) = 0;
  virtual ProjectHistory history(const std::string& project) = 0;
  /// Files of `language`'s family at `commit`.
  virtual RepoSnapshot snapshot(const std::string& project, const std::string& commit, Language language) = 0;
};

/// One git repository per project under a common root (`<root>/<project>`).
class LocalGitSource : public PatchSource {
 public:
  explicit LocalGitSource(std::filesystem::path repos_root);

  Patch load_patch(const std::string& project, const std::string& commit_id) override;
  ProjectHistory history(const std::string& project) override;
  RepoSnapshot snapshot(const std::string& project, const std::string& commit, Language language) override;

  std::shared_ptr<const GitRepository> repository(const std::string& project);

 private:
  std::filesystem::path root_;
  std::mutex mutex_;
  std::map<std::string, std::shared_ptr<const GitRepository>> repos_;
};

/// Placeholder for hosted platforms (GitHub, Google Git, bugs.chromium).
/// Every call fails with Error{SourceUnreadable}; crawling is not done offline.
class RemotePlatformSource : public PatchSource {
 public:
  explicit RemotePlatformSource(std::string platform) : platform_(std::move(platform)) {}

  Patch load_patch(const std::string& project, const std::string& commit_id) override;
  ProjectHistory history(const std::string& project) override;
  RepoSnapshot snapshot(const std::string& project, const std::string& commit, Language language) override;

 private:
  [[noreturn]] void unavailable() const;
  std::string platform_;
};

}  // namespace vulnforge
