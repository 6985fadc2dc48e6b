#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "vulnforge/syntax.hpp"
#include "vulnforge/types.hpp"

namespace vulnforge {

/// Before/after indexes of one changed file. Unparseable or absent versions
/// index as empty.
struct FileVersions {
  FileIndex before;
  FileIndex after;
};
FileVersions index_versions(const ChangedFile& file);

/// A function matched across versions by name (the n-th definition of a
/// name in one version pairs with the n-th in the other). `affected` is set
/// when the before span holds a deleted line or the after span an added one.
struct FunctionPair {
  const FunctionInfo* before = nullptr;
  const FunctionInfo* after = nullptr;
  bool affected = false;
};
std::vector<FunctionPair> pair_functions(const ChangedFile& file, const FileIndex& before, const FileIndex& after);

/// Affected functions for the prompt: the before-version body, or the
/// after-version body when the function is new. Source order.
std::vector<FunctionRecord> affected_functions(const ChangedFile& file, const FileIndex& before,
                                               const FileIndex& after);

/// (before, after) labels. Throws Error{IncompleteStage} without a joint verdict.
std::pair<Label, Label> label_file(const ChangedFile& file);

std::vector<FunctionRecord> label_functions(const ChangedFile& file, const FileIndex& before, const FileIndex& after);

/// Add and Delete lines in hunk order.
std::vector<LineChange> label_lines(const ChangedFile& file);

/// `files` carry their verdicts; they replace patch.files in the record.
/// Throws Error{IncompleteStage} if `outdated` is unset or a file lacks a
/// joint verdict.
DatasetRecord assemble_record(const VulnEntry& entry, const Patch& patch, const std::vector<ChangedFile>& files,
                              std::vector<RepositoryContext> trees, std::optional<bool> outdated);

}  // namespace vulnforge
