#include "vulnforge/ingest.hpp"

#include <algorithm>
#include <fstream>

#include "vulnforge/diff.hpp"
#include "vulnforge/error.hpp"
#include "vulnforge/serialize.hpp"

namespace vulnforge {

EntryLoadResult load_entries(const SourceConfig& cfg) {
  std::ifstream in(cfg.entries_path, std::ios::binary);
  if (!in) throw Error(ErrorKind::SourceUnreadable, "cannot open entries file " + cfg.entries_path.string());

  EntryLoadResult result;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      VulnEntry entry = parse_entry_line(line);
      if (year_of(entry.publish_date) < cfg.since_year) continue;
      if (cfg.language_filter && !cfg.language_filter->count(entry.language)) continue;
      result.entries.push_back(std::move(entry));
    } catch (const Error& e) {
      result.errors.push_back({line_no, e.what()});
    }
  }
  std::stable_sort(result.entries.begin(), result.entries.end(), [](const VulnEntry& a, const VulnEntry& b) {
    return std::tie(a.publish_date, a.cve_id) < std::tie(b.publish_date, b.cve_id);
  });
  return result;
}

bool is_text(std::string_view content) {
  std::size_t i = 0;
  const std::size_t n = content.size();
  while (i < n) {
    const auto c = static_cast<unsigned char>(content[i]);
    if (c == 0) return false;
    if (c < 0x80) {
      ++i;
      continue;
    }
    std::size_t extra = 0;
    unsigned min = 0;
    if ((c & 0xE0) == 0xC0) {
      extra = 1;
      min = 0x80;
    } else if ((c & 0xF0) == 0xE0) {
      extra = 2;
      min = 0x800;
    } else if ((c & 0xF8) == 0xF0) {
      extra = 3;
      min = 0x10000;
    } else {
      return false;
    }
    if (i + extra >= n) return false;
    unsigned code = c & (0x3F >> extra);
    for (std::size_t k = 1; k <= extra; ++k) {
      const auto cc = static_cast<unsigned char>(content[i + k]);
      if ((cc & 0xC0) != 0x80) return false;
      code = (code << 6) | (cc & 0x3F);
    }
    if (code < min || code > 0x10FFFF || (code >= 0xD800 && code <= 0xDFFF)) return false;
    i += extra + 1;
  }
  return true;
}

Language detect_file_language(std::string_view path, std::string_view content) {
  if (!content.empty() && !is_text(content)) return Language::Other;
  const auto slash = path.find_last_of('/');
  const auto name = slash == std::string_view::npos ? path : path.substr(slash + 1);
  const auto dot = name.find_last_of('.');
  if (dot == std::string_view::npos) return Language::Other;
  const auto ext = name.substr(dot);
  if (ext == ".c" || ext == ".h") return Language::C;
  if (ext == ".cc" || ext == ".cpp" || ext == ".cxx" || ext == ".hpp" || ext == ".hh" || ext == ".hxx" ||
      ext == ".C")
    return Language::Cpp;
  if (ext == ".java") return Language::Java;
  if (ext == ".py") return Language::Python;
  return Language::Other;
}

namespace {

bool looks_like_github(const std::string& project) {
  return std::count(project.begin(), project.end(), '/') == 1 && project.front() != '/' &&
         project.back() != '/';
}

}  // namespace

Patch load_patch(const GitRepository& repo, const std::string& project, const std::string& commit_id) {
  const CommitInfo info = repo.commit_info(commit_id);
  if (info.parents.size() > 1)
    throw Error(ErrorKind::MergeCommit, info.id + " has " + std::to_string(info.parents.size()) + " parents");

  Patch patch;
  patch.commit_id = info.id;
  patch.commit_message = info.message;
  patch.commit_date = info.date;
  patch.project = project;
  if (!info.parents.empty()) patch.parent_patch = info.parents.front();
  if (looks_like_github(project)) {
    patch.url = "https://api.github.com/repos/" + project + "/commits/" + info.id;
    patch.html_url = "https://github.com/" + project + "/commit/" + info.id;
  }

  const auto changes = repo.changed_files(info.id, patch.parent_patch);
  if (changes.empty()) throw Error(ErrorKind::SourceUnreadable, info.id + " changes no files");

  std::vector<std::string> before_paths, after_paths;
  for (const auto& c : changes) {
    if (c.status != 'A') before_paths.push_back(c.path);
    if (c.status != 'D') after_paths.push_back(c.path);
  }
  const auto before = patch.parent_patch ? repo.read_blobs(*patch.parent_patch, before_paths)
                                         : std::map<std::string, std::string>{};
  const auto after = repo.read_blobs(info.id, after_paths);

  for (const auto& c : changes) {
    ChangedFile file;
    file.file_name = c.path;
    if (const auto it = before.find(c.path); it != before.end() && c.status != 'A') file.code_before = it->second;
    if (const auto it = after.find(c.path); it != after.end() && c.status != 'D') file.code_after = it->second;
    if (!is_text(file.code_before) || !is_text(file.code_after)) {
      file.code_before.clear();
      file.code_after.clear();
      file.file_language = Language::Other;
    } else {
      file.file_language = detect_file_language(c.path);
      file.code_change = extract_hunks(file.code_before, file.code_after);
    }
    if (looks_like_github(project))
      file.html_url = "https://github.com/" + project + "/blob/" + info.id + "/" + c.path;
    patch.files.push_back(std::move(file));
  }
  check_invariants(patch);
  return patch;
}

LocalGitSource::LocalGitSource(std::filesystem::path repos_root) : root_(std::move(repos_root)) {
  std::error_code ec;
  if (!std::filesystem::is_directory(root_, ec))
    throw Error(ErrorKind::SourceUnreadable, "repository root " + root_.string() + " does not exist");
}

std::shared_ptr<const GitRepository> LocalGitSource::repository(const std::string& project) {
  std::lock_guard lock(mutex_);
  auto& slot = repos_[project];
  if (!slot) slot = std::make_shared<const GitRepository>(root_ / project);
  return slot;
}

Patch LocalGitSource::load_patch(const std::string& project, const std::string& commit_id) {
  return vulnforge::load_patch(*repository(project), project, commit_id);
}

ProjectHistory LocalGitSource::history(const std::string& project) {
  return ProjectHistory(repository(project)->history());
}

RepoSnapshot LocalGitSource::snapshot(const std::string& project, const std::string& commit, Language language) {
  const auto repo = repository(project);
  std::vector<std::string> wanted;
  for (auto& path : repo->list_files(commit)) {
    const Language lang = detect_file_language(path);
    if (is_supported(lang) && same_family(lang, language)) wanted.push_back(std::move(path));
  }
  RepoSnapshot snap;
  for (auto& [path, content] : repo->read_blobs(commit, wanted))
    if (is_text(content)) snap.emplace(path, std::move(content));
  return snap;
}

void RemotePlatformSource::unavailable() const {
  throw Error(ErrorKind::SourceUnreadable, "remote platform '" + platform_ + "' is not reachable offline");
}

Patch RemotePlatformSource::load_patch(const std::string&, const std::string&) { unavailable(); }
ProjectHistory RemotePlatformSource::history(const std::string&) { unavailable(); }
RepoSnapshot RemotePlatformSource::snapshot(const std::string&, const std::string&, Language) { unavailable(); }

}  // namespace vulnforge
