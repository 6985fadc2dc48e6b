#include "vulnforge/git.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include "vulnforge/error.hpp"
#include "vulnforge/subprocess.hpp"

namespace vulnforge {

namespace {

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t next = text.find(sep, pos);
    if (next == std::string::npos) {
      parts.push_back(text.substr(pos));
      break;
    }
    parts.push_back(text.substr(pos, next - pos));
    pos = next + 1;
  }
  return parts;
}

std::string trim(std::string s) {
  while (!s.empty() && (s.back() == '\n' || s.back() == '\r' || s.back() == ' ')) s.pop_back();
  return s;
}

Timestamp from_epoch(const std::string& text) {
  return Timestamp{std::chrono::seconds{std::stoll(text)}};
}

}  // namespace

GitRepository::GitRepository(std::filesystem::path path) : path_(std::move(path)) {
  std::error_code ec;
  if (!std::filesystem::is_directory(path_, ec))
    throw Error(ErrorKind::SourceUnreadable, "no repository at " + path_.string());
  const auto r = run_process(git_args({"rev-parse", "--git-dir"}));
  if (!r.ok()) throw Error(ErrorKind::SourceUnreadable, path_.string() + " is not a git repository");
}

std::vector<std::string> GitRepository::git_args(std::initializer_list<std::string> args) const {
  std::vector<std::string> argv{"git", "-C", path_.string(), "-c", "core.quotePath=false"};
  argv.insert(argv.end(), args.begin(), args.end());
  return argv;
}

std::optional<std::string> GitRepository::resolve_commit(const std::string& rev) const {
  if (rev.empty() || rev.front() == '-') return std::nullopt;
  const auto r = run_process(git_args({"rev-parse", "--verify", "--quiet", rev + "^{commit}"}));
  if (!r.ok()) return std::nullopt;
  return trim(r.out);
}

CommitInfo GitRepository::commit_info(const std::string& rev) const {
  const auto id = resolve_commit(rev);
  if (!id) throw Error(ErrorKind::CommitNotFound, rev + " not found in " + path_.string());
  const auto r = run_process(git_args({"log", "-1", "--format=%H%x1f%P%x1f%ct%x1f%B", *id}));
  if (!r.ok()) throw Error(ErrorKind::CommitNotFound, rev + ": " + r.err);
  const auto fields = split(r.out, '\x1f');
  if (fields.size() < 4) throw Error(ErrorKind::SourceUnreadable, "unexpected git log output for " + rev);
  CommitInfo info;
  info.id = fields[0];
  std::istringstream parents(fields[1]);
  for (std::string p; parents >> p;) info.parents.push_back(p);
  info.date = from_epoch(fields[2]);
  info.message = trim(fields[3]);
  return info;
}

std::vector<TreeChange> GitRepository::changed_files(const std::string& id,
                                                     const std::optional<std::string>& parent) const {
  const auto r = parent ? run_process(git_args({"diff-tree", "-r", "-z", "--raw", "--no-renames",
                                                "--no-commit-id", *parent, id}))
                        : run_process(git_args({"diff-tree", "-r", "-z", "--raw", "--no-renames",
                                                "--no-commit-id", "--root", id}));
  if (!r.ok()) throw Error(ErrorKind::SourceUnreadable, "diff-tree " + id + ": " + r.err);

  // ":<old mode> <new mode> <old sha> <new sha> <status>\0<path>\0"
  std::vector<TreeChange> changes;
  const auto parts = split(r.out, '\0');
  for (std::size_t i = 0; i + 1 < parts.size(); i += 2) {
    const std::string& meta = parts[i];
    if (meta.empty() || meta.front() != ':') break;
    std::istringstream fields(meta.substr(1));
    std::string old_mode, new_mode, old_sha, new_sha, status;
    fields >> old_mode >> new_mode >> old_sha >> new_sha >> status;
    if (old_mode == "160000" || new_mode == "160000") continue;
    changes.push_back({status.empty() ? 'M' : status.front(), parts[i + 1]});
  }
  return changes;
}

std::optional<std::string> GitRepository::read_blob(const std::string& commit,
                                                    const std::string& path) const {
  const auto r = run_process(git_args({"cat-file", "blob", commit + ":" + path}));
  if (!r.ok()) return std::nullopt;
  return r.out;
}

std::map<std::string, std::string> GitRepository::read_blobs(const std::string& commit,
                                                             const std::vector<std::string>& paths) const {
  std::map<std::string, std::string> blobs;
  if (paths.empty()) return blobs;
  ProcessOptions options;
  for (const auto& p : paths) options.input += commit + ":" + p + "\n";
  const auto r = run_process(git_args({"cat-file", "--batch"}), options);
  if (!r.ok()) throw Error(ErrorKind::SourceUnreadable, "cat-file --batch: " + r.err);

  std::size_t pos = 0;
  for (const auto& path : paths) {
    const std::size_t eol = r.out.find('\n', pos);
    if (eol == std::string::npos) break;
    const std::string header = r.out.substr(pos, eol - pos);
    pos = eol + 1;
    std::istringstream fields(header);
    std::string sha, type;
    std::size_t size = 0;
    fields >> sha >> type;
    if (type == "missing" || type == "ambiguous" || !(fields >> size)) continue;
    if (type == "blob") blobs.emplace(path, r.out.substr(pos, size));
    pos += size + 1;
  }
  return blobs;
}

std::vector<std::string> GitRepository::list_files(const std::string& commit) const {
  const auto r = run_process(git_args({"ls-tree", "-r", "-z", "--full-tree", commit}));
  if (!r.ok()) throw Error(ErrorKind::CommitNotFound, "ls-tree " + commit + ": " + r.err);
  std::vector<std::string> files;
  for (const auto& entry : split(r.out, '\0')) {
    const std::size_t tab = entry.find('\t');
    if (tab == std::string::npos) continue;
    std::istringstream fields(entry.substr(0, tab));
    std::string mode, type;
    fields >> mode >> type;
    if (type == "blob") files.push_back(entry.substr(tab + 1));
  }
  return files;
}

std::vector<CommitSummary> GitRepository::history() const {
  const auto r = run_process(git_args({"log", "--all", "--topo-order", "--reverse", "--no-renames",
                                       "--name-only", "--format=%x1e%H%x1f%P%x1f%ct"}));
  if (!r.ok()) {
    // A repository without commits has no history.
    if (r.err.find("does not have any commits") != std::string::npos) return {};
    throw Error(ErrorKind::SourceUnreadable, "git log: " + r.err);
  }
  std::vector<CommitSummary> commits;
  for (const auto& record : split(r.out, '\x1e')) {
    if (record.empty()) continue;
    const auto lines = split(record, '\n');
    const auto header = split(lines.front(), '\x1f');
    if (header.size() < 3) continue;
    CommitSummary c;
    c.id = header[0];
    std::istringstream parents(header[1]);
    for (std::string p; parents >> p;) c.parents.push_back(p);
    c.date = from_epoch(header[2]);
    for (std::size_t i = 1; i < lines.size(); ++i)
      if (!lines[i].empty()) c.files.push_back(lines[i]);
    commits.push_back(std::move(c));
  }
  return commits;
}

ProjectHistory::ProjectHistory(std::vector<CommitSummary> topo_ordered)
    : commits_(std::move(topo_ordered)) {
  chronological_.resize(commits_.size());
  std::iota(chronological_.begin(), chronological_.end(), 0);
  std::stable_sort(chronological_.begin(), chronological_.end(), [this](std::size_t a, std::size_t b) {
    return commits_[a].date < commits_[b].date;
  });
  for (std::size_t i = 0; i < commits_.size(); ++i) by_id_.emplace(commits_[i].id, i);
  for (std::size_t r = 0; r < chronological_.size(); ++r) rank_.emplace(commits_[chronological_[r]].id, r);
}

const CommitSummary* ProjectHistory::find(const std::string& id) const {
  const auto it = by_id_.find(id);
  return it == by_id_.end() ? nullptr : &commits_[it->second];
}

std::optional<std::size_t> ProjectHistory::rank(const std::string& id) const {
  const auto it = rank_.find(id);
  if (it == rank_.end()) return std::nullopt;
  return it->second;
}

}  // namespace vulnforge
