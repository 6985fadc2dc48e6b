#pragma once

#include <filesystem>
#include <map>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "vulnforge/types.hpp"

namespace vftest {

class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

void write_file(const std::filesystem::path& path, const std::string& content);
std::string read_file(const std::filesystem::path& path);

/// Scratch git repository driven through the git binary.
class FixtureRepo {
 public:
  explicit FixtureRepo(std::filesystem::path dir);

  const std::filesystem::path& dir() const { return dir_; }
  void write(const std::string& path, const std::string& content);
  void remove(const std::string& path);
  /// Stages everything and commits with identical author and committer
  /// dates ("2014-03-01T10:00:00Z"). Returns the commit id.
  std::string commit(const std::string& message, const std::string& date);
  /// Runs git in the repository and returns stdout; throws on failure.
  std::string git(const std::vector<std::string>& args, const std::string& date = {}) const;

 private:
  std::filesystem::path dir_;
};

// ---------------------------------------------------------------------------
// Random text for diff properties.

std::string random_text(std::mt19937& rng, int max_lines, int alphabet);
/// Derived from `base` by random line edits so the pair shares structure.
std::string mutate_text(std::mt19937& rng, const std::string& base, int alphabet);

/// Length of the longest common subsequence of the two line sequences.
std::size_t lcs_length(const std::string& a, const std::string& b);

// ---------------------------------------------------------------------------
// Synthetic call graphs rendered as C sources.

struct SynthFunction {
  std::string name;
  int file = 0;
  std::vector<std::string> calls;
};

struct SynthRepo {
  int files = 1;
  std::vector<SynthFunction> functions;

  std::string file_name(int file) const;
  vulnforge::RepoSnapshot render() const;
};

/// Up to `max_functions` functions over up to `max_files` files. Names may
/// repeat across files; call targets may be undefined (library calls).
SynthRepo random_repo(std::mt19937& rng, int max_functions = 50, int max_files = 5);

/// (file, name) pairs reachable from `roots` within `depth_limit` call
/// steps, by repeated frontier expansion over the model itself.
std::set<std::pair<std::string, std::string>> reachable(const SynthRepo& repo,
                                                        const std::vector<std::size_t>& roots, int depth_limit);

// ---------------------------------------------------------------------------
// Fixtures modelled on real-world patch patterns.

/// A small C file pair in the style of an allocation wrapper fix:
/// checked_xmalloc calls xmalloc on a line the change does not touch.
struct WrapperFixture {
  std::string before;
  std::string after;
  int call_line = 0;  // line of the xmalloc call in `before`
};
WrapperFixture wrapper_fixture();

/// Repository with three commits over drivers/gpu/drm/ttm/ttm_page_alloc.c:
/// an initial import, the original fix and its follow-up. Both fixes also
/// touch a blacklisted companion file.
struct TtmHistory {
  std::string initial;
  std::string original;
  std::string follow_up;
};
inline constexpr const char* kTtmPath = "drivers/gpu/drm/ttm/ttm_page_alloc.c";
inline constexpr const char* kTtmCompanion = "drivers/gpu/drm/ttm/ttm.ChangeLog";
TtmHistory build_ttm_history(FixtureRepo& repo);

/// Entries file, repositories and config for an end-to-end run: three
/// patches over two C projects with tangled, outdated and clean fixes.
struct Corpus {
  std::filesystem::path root;
  std::filesystem::path config;
  std::filesystem::path entries;
  std::vector<std::string> commits;  // in entry order
};
Corpus build_corpus(const std::filesystem::path& root);
/// Appends an entry whose patch is a merge commit to the corpus.
std::string add_merge_entry(Corpus& corpus);

vulnforge::VulnEntry make_entry(const std::string& cve, const std::string& date, vulnforge::Language lang,
                                std::vector<vulnforge::CommitRef> commits = {});

}  // namespace vftest
