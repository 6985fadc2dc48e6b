#pragma once

#include <string>
#include <variant>
#include <vector>

#include "vulnforge/syntax.hpp"
#include "vulnforge/types.hpp"

namespace vulnforge {

/// A changed region of one file in before-version line numbers.
struct Snippet {
  std::string file;
  std::vector<int> lines;  // sorted, unique, non-empty
  friend bool operator==(const Snippet&, const Snippet&) = default;
};

/// One snippet per contiguous change block. Blocks with deletions use the
/// deleted lines. Pure additions map the enclosing after-version function to
/// the before-version function of the same name; additions outside any
/// function yield no snippet. `after` may be null, which disables the
/// fallback.
std::vector<Snippet> make_snippets(const ChangedFile& file, const FileIndex& before, const FileIndex* after);

std::vector<FunctionRef> get_top_level_functions(const std::string& file, const SyntaxIndex& index);

/// Top-level functions of snip.file whose span contains a snippet line.
std::vector<FunctionRef> get_out_func(const Snippet& snip, const SyntaxIndex& index);

/// Call-site names inside the functions of get_out_func, deduplicated,
/// in source order.
std::vector<std::string> get_near_func(const Snippet& snip, const SyntaxIndex& index);

/// Root functions for a callee tree, root API names for a caller tree.
using TreeRoots = std::variant<std::vector<FunctionRef>, std::vector<std::string>>;

/// Breadth-first tree construction over name-resolved calls.
/// Callee: depth 0 holds the root functions; a node at depth d < limit links
/// to every function named by one of its call sites.
/// Caller: depth 0 holds the direct callers of the root APIs; a node at
/// depth d < limit links to every function that calls it.
/// Each function is visited once, so cycles terminate.
/// Mismatched roots are converted: function roots become their names for a
/// caller tree, API names resolve to their definitions for a callee tree.
CallTree static_tool_extractor(const TreeRoots& roots, const SyntaxIndex& index, Direction direction,
                               int depth_limit = 5);

CallTree build_callee_tree(const std::vector<FunctionRef>& roots, const SyntaxIndex& index, int depth_limit = 5);
CallTree build_caller_tree(const std::vector<std::string>& apis, const SyntaxIndex& index, int depth_limit = 5);

struct RelatedFile {
  std::string file;
  std::vector<Snippet> snippets;
};

struct Dependencies {
  std::vector<CallTree> callers;  // one per snippet, in input order
  std::vector<CallTree> callees;
};

/// Builds one caller and one callee tree per snippet against `index`.
Dependencies extract_dependencies(const std::vector<RelatedFile>& related, const SyntaxIndex& index,
                                  int depth_limit = 5);

/// Snapshot convenience: indexes `snapshot` for `language` first. Parse
/// failures end up in `errors` when it is non-null.
Dependencies extract_dependencies(Language language, const std::vector<RelatedFile>& related,
                                  const RepoSnapshot& snapshot, int depth_limit = 5,
                                  std::vector<ParseReport>* errors = nullptr);

/// Node bodies concatenated in breadth-first order, roots first.
std::string inter_procedural_code(const CallTree& tree, const SyntaxIndex& index);

}  // namespace vulnforge
