#include "vulnforge/depgraph.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <set>

namespace vulnforge {

namespace {

const FunctionInfo* enclosing(const FileIndex& file, int line) {
  for (const auto& fn : file.functions)
    if (fn.span.contains(line)) return &fn;
  return nullptr;
}

void add_unique(std::vector<int>& lines, int line) {
  if (std::find(lines.begin(), lines.end(), line) == lines.end()) lines.push_back(line);
}

}  // namespace

std::vector<Snippet> make_snippets(const ChangedFile& file, const FileIndex& before, const FileIndex* after) {
  std::vector<Snippet> out;
  for (const auto& hunk : file.code_change) {
    std::size_t i = 0;
    while (i < hunk.lines.size()) {
      if (hunk.lines[i].kind == ChangeKind::Context) {
        ++i;
        continue;
      }
      Snippet snip{file.file_name, {}};
      std::vector<int> added;
      for (; i < hunk.lines.size() && hunk.lines[i].kind != ChangeKind::Context; ++i) {
        const auto& lc = hunk.lines[i];
        if (lc.kind == ChangeKind::Delete)
          snip.lines.push_back(lc.line_number);
        else
          added.push_back(lc.line_number);
      }
      if (snip.lines.empty() && after) {
        std::set<std::string> names;
        for (int line : added)
          if (const auto* fn = enclosing(*after, line)) names.insert(fn->name);
        for (const auto& fn : before.functions) {
          if (!names.count(fn.name)) continue;
          for (int l = fn.span.start; l <= fn.span.end; ++l) add_unique(snip.lines, l);
        }
      }
      if (snip.lines.empty()) continue;
      std::sort(snip.lines.begin(), snip.lines.end());
      snip.lines.erase(std::unique(snip.lines.begin(), snip.lines.end()), snip.lines.end());
      out.push_back(std::move(snip));
    }
  }
  return out;
}

std::vector<FunctionRef> get_top_level_functions(const std::string& file, const SyntaxIndex& index) {
  std::vector<FunctionRef> out;
  if (const FileIndex* f = index.file(file))
    for (const auto& fn : f->functions) out.push_back(make_ref(*f, fn));
  return out;
}

std::vector<FunctionRef> get_out_func(const Snippet& snip, const SyntaxIndex& index) {
  std::vector<FunctionRef> out;
  const FileIndex* f = index.file(snip.file);
  if (!f) return out;
  for (const auto& fn : f->functions) {
    const bool hit = std::any_of(snip.lines.begin(), snip.lines.end(), [&](int l) { return fn.span.contains(l); });
    if (hit) out.push_back(make_ref(*f, fn));
  }
  return out;
}

std::vector<std::string> get_near_func(const Snippet& snip, const SyntaxIndex& index) {
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const auto& ref : get_out_func(snip, index)) {
    const FunctionInfo* fn = index.lookup(ref);
    if (!fn) continue;
    for (const auto& call : fn->calls)
      if (seen.insert(call.name).second) out.push_back(call.name);
  }
  return out;
}

namespace {

class TreeBuilder {
 public:
  TreeBuilder(Direction direction, int depth_limit) {
    tree_.direction = direction;
    tree_.depth_limit = depth_limit;
  }

  void seed(const FunctionRef& ref) {
    if (depth_of_.emplace(ref, 0).second) {
      tree_.nodes.push_back({ref, 0});
      queue_.push_back(ref);
    }
  }

  void link(const FunctionRef& from, const FunctionRef& to, int depth) {
    edges_.emplace(from, to);
    if (depth_of_.emplace(to, depth).second) {
      tree_.nodes.push_back({to, depth});
      queue_.push_back(to);
    }
  }

  template <typename Expand>
  CallTree run(Expand expand) {
    while (!queue_.empty()) {
      const FunctionRef cur = queue_.front();
      queue_.pop_front();
      const int depth = depth_of_.at(cur);
      if (depth >= tree_.depth_limit) continue;
      expand(cur, depth + 1);
    }
    tree_.edges.assign(edges_.begin(), edges_.end());
    return std::move(tree_);
  }

  CallTree& tree() { return tree_; }

 private:
  CallTree tree_;
  std::map<FunctionRef, int> depth_of_;
  std::set<std::pair<FunctionRef, FunctionRef>> edges_;
  std::deque<FunctionRef> queue_;
};

}  // namespace

CallTree build_callee_tree(const std::vector<FunctionRef>& roots, const SyntaxIndex& index, int depth_limit) {
  TreeBuilder b(Direction::Callee, depth_limit);
  for (const auto& r : roots) b.seed(r);
  return b.run([&](const FunctionRef& cur, int next) {
    const FunctionInfo* fn = index.lookup(cur);
    if (!fn) return;
    for (const auto& call : fn->calls)
      for (const auto& callee : index.functions_named(call.name)) b.link(cur, callee, next);
  });
}

CallTree build_caller_tree(const std::vector<std::string>& apis, const SyntaxIndex& index, int depth_limit) {
  TreeBuilder b(Direction::Caller, depth_limit);
  b.tree().root_apis = apis;
  for (const auto& api : apis)
    for (const auto& caller : index.callers_of(api)) b.seed(caller);
  return b.run([&](const FunctionRef& cur, int next) {
    for (const auto& caller : index.callers_of(cur.name)) b.link(cur, caller, next);
  });
}

CallTree static_tool_extractor(const TreeRoots& roots, const SyntaxIndex& index, Direction direction,
                               int depth_limit) {
  if (direction == Direction::Callee) {
    if (const auto* fns = std::get_if<std::vector<FunctionRef>>(&roots))
      return build_callee_tree(*fns, index, depth_limit);
    std::vector<FunctionRef> resolved;
    for (const auto& name : std::get<std::vector<std::string>>(roots))
      for (const auto& ref : index.functions_named(name)) resolved.push_back(ref);
    CallTree tree = build_callee_tree(resolved, index, depth_limit);
    tree.root_apis = std::get<std::vector<std::string>>(roots);
    return tree;
  }
  if (const auto* apis = std::get_if<std::vector<std::string>>(&roots))
    return build_caller_tree(*apis, index, depth_limit);
  std::vector<std::string> names;
  for (const auto& ref : std::get<std::vector<FunctionRef>>(roots))
    if (std::find(names.begin(), names.end(), ref.name) == names.end()) names.push_back(ref.name);
  return build_caller_tree(names, index, depth_limit);
}

namespace {

RootSnippet root_of(const Snippet& snip) {
  return {snip.file, {snip.lines.front(), snip.lines.back()}};
}

}  // namespace

Dependencies extract_dependencies(const std::vector<RelatedFile>& related, const SyntaxIndex& index,
                                  int depth_limit) {
  Dependencies deps;
  for (const auto& file : related) {
    for (const auto& snip : file.snippets) {
      if (snip.lines.empty()) continue;
      CallTree caller = build_caller_tree(get_near_func(snip, index), index, depth_limit);
      caller.root_snippet = root_of(snip);
      CallTree callee = build_callee_tree(get_out_func(snip, index), index, depth_limit);
      callee.root_snippet = root_of(snip);
      deps.callers.push_back(std::move(caller));
      deps.callees.push_back(std::move(callee));
    }
  }
  return deps;
}

Dependencies extract_dependencies(Language language, const std::vector<RelatedFile>& related,
                                  const RepoSnapshot& snapshot, int depth_limit, std::vector<ParseReport>* errors) {
  const SyntaxIndex index = build_syntax_index(snapshot, language);
  if (errors) errors->insert(errors->end(), index.errors().begin(), index.errors().end());
  return extract_dependencies(related, index, depth_limit);
}

std::string inter_procedural_code(const CallTree& tree, const SyntaxIndex& index) {
  std::string out;
  for (const auto& node : tree.nodes) {
    std::string body = index.function_text(node.ref);
    if (body.empty()) continue;
    if (!out.empty() && out.back() != '\n') out += '\n';
    out += body;
  }
  return out;
}

}  // namespace vulnforge
