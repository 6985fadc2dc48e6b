#include "vulnforge/labeling.hpp"

#include <map>
#include <set>

#include "vulnforge/diff.hpp"
#include "vulnforge/error.hpp"

namespace vulnforge {

namespace {

FileIndex index_or_empty(const std::string& path, const std::string& content, Language lang) {
  if (content.empty() || !is_supported(lang)) return FileIndex{path, lang, {}};
  try {
    return parse_source(path, content, lang);
  } catch (const Error&) {
    return FileIndex{path, lang, {}};
  }
}

bool hits(const LineSpan& span, const std::vector<int>& lines) {
  for (int l : lines)
    if (span.contains(l)) return true;
  return false;
}

FunctionRecord record_of(const ChangedFile& file, const FunctionInfo& fn, Version version, bool changed,
                         Label target) {
  const std::string& content = version == Version::Before ? file.code_before : file.code_after;
  return {fn.name, file.file_name, fn.span, slice_lines(content, fn.span), changed, target, version};
}

}  // namespace

FileVersions index_versions(const ChangedFile& file) {
  return {index_or_empty(file.file_name, file.code_before, file.file_language),
          index_or_empty(file.file_name, file.code_after, file.file_language)};
}

std::vector<FunctionPair> pair_functions(const ChangedFile& file, const FileIndex& before, const FileIndex& after) {
  const auto deleted = deleted_lines(file.code_change);
  const auto added = added_lines(file.code_change);

  std::map<std::string, std::vector<const FunctionInfo*>> after_by_name;
  for (const auto& fn : after.functions) after_by_name[fn.name].push_back(&fn);
  std::map<std::string, std::size_t> used;
  std::set<const FunctionInfo*> matched;

  std::vector<FunctionPair> pairs;
  for (const auto& fn : before.functions) {
    FunctionPair p;
    p.before = &fn;
    auto& candidates = after_by_name[fn.name];
    std::size_t& n = used[fn.name];
    if (n < candidates.size()) {
      p.after = candidates[n++];
      matched.insert(p.after);
    }
    p.affected = hits(fn.span, deleted) || (p.after && hits(p.after->span, added));
    pairs.push_back(p);
  }
  for (const auto& fn : after.functions) {
    if (matched.count(&fn)) continue;
    pairs.push_back({nullptr, &fn, hits(fn.span, added)});
  }
  return pairs;
}

std::vector<FunctionRecord> affected_functions(const ChangedFile& file, const FileIndex& before,
                                               const FileIndex& after) {
  std::vector<FunctionRecord> out;
  for (const auto& p : pair_functions(file, before, after)) {
    if (!p.affected) continue;
    if (p.before)
      out.push_back(record_of(file, *p.before, Version::Before, true, Label::NonVulnerable));
    else
      out.push_back(record_of(file, *p.after, Version::After, true, Label::NonVulnerable));
  }
  return out;
}

std::pair<Label, Label> label_file(const ChangedFile& file) {
  if (!file.joint) throw Error(ErrorKind::IncompleteStage, file.file_name + " has no joint verdict");
  if (*file.joint == JointVerdict::Related) return {Label::Vulnerable, Label::NonVulnerable};
  return {Label::NonVulnerable, Label::NonVulnerable};
}

std::vector<FunctionRecord> label_functions(const ChangedFile& file, const FileIndex& before, const FileIndex& after) {
  const bool related = label_file(file).first == Label::Vulnerable;
  std::vector<FunctionRecord> out;
  for (const auto& p : pair_functions(file, before, after)) {
    if (!p.affected) {
      if (p.before)
        out.push_back(record_of(file, *p.before, Version::Before, false, Label::NonVulnerable));
      else
        out.push_back(record_of(file, *p.after, Version::After, false, Label::NonVulnerable));
      continue;
    }
    if (p.before)
      out.push_back(record_of(file, *p.before, Version::Before, true,
                              related ? Label::Vulnerable : Label::NonVulnerable));
    if (p.after) out.push_back(record_of(file, *p.after, Version::After, true, Label::NonVulnerable));
  }
  return out;
}

std::vector<LineChange> label_lines(const ChangedFile& file) {
  std::vector<LineChange> out;
  for (const auto& h : file.code_change)
    for (const auto& l : h.lines)
      if (l.kind != ChangeKind::Context) out.push_back(l);
  return out;
}

DatasetRecord assemble_record(const VulnEntry& entry, const Patch& patch, const std::vector<ChangedFile>& files,
                              std::vector<RepositoryContext> trees, std::optional<bool> outdated) {
  if (!outdated) throw Error(ErrorKind::IncompleteStage, patch.commit_id + " has not been trace filtered");
  DatasetRecord record;
  record.entry = entry;
  record.patch = patch;
  record.patch.files = files;
  record.patch.outdated = *outdated;
  for (auto& file : record.patch.files) {
    file.target = label_file(file).first;
    const FileVersions v = index_versions(file);
    auto fns = label_functions(file, v.before, v.after);
    record.function_level.insert(record.function_level.end(), fns.begin(), fns.end());
    for (auto& lc : label_lines(file)) record.line_level.push_back({file.file_name, std::move(lc)});
  }
  record.file_level = record.patch.files;
  record.repository_level = std::move(trees);
  check_invariants(record);
  return record;
}

}  // namespace vulnforge
