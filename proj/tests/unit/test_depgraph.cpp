#include <gtest/gtest.h>

#include <limits>
#include <random>

#include "fixtures.hpp"
#include "vulnforge/depgraph.hpp"
#include "vulnforge/diff.hpp"

using namespace vulnforge;

namespace {

using NodeSet = std::set<std::pair<std::string, std::string>>;

NodeSet node_set(const CallTree& t) {
  NodeSet out;
  for (const auto& n : t.nodes) out.insert({n.ref.file, n.ref.name});
  return out;
}

// Functions that reach a direct caller of `api` within `limit` call steps.
NodeSet caller_oracle(const vftest::SynthRepo& repo, const std::string& api, int limit) {
  const std::size_t n = repo.functions.size();
  constexpr int inf = std::numeric_limits<int>::max() / 4;
  std::vector<std::vector<int>> d(n, std::vector<int>(n, inf));
  for (std::size_t i = 0; i < n; ++i) {
    d[i][i] = 0;
    for (const auto& c : repo.functions[i].calls)
      for (std::size_t j = 0; j < n; ++j)
        if (i != j && repo.functions[j].name == c) d[i][j] = 1;
  }
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) d[i][j] = std::min(d[i][j], d[i][k] + d[k][j]);
  NodeSet out;
  for (std::size_t g = 0; g < n; ++g) {
    const auto& calls = repo.functions[g].calls;
    if (std::find(calls.begin(), calls.end(), api) == calls.end()) continue;
    for (std::size_t f = 0; f < n; ++f)
      if (d[f][g] <= limit) out.insert({repo.file_name(repo.functions[f].file), repo.functions[f].name});
  }
  return out;
}

SyntaxIndex index_of(const RepoSnapshot& snap) { return build_syntax_index(snap, Language::C); }

const RepoSnapshot kGraph = {
    {"a.c",
     "int leaf(int x) { return x; }\n"
     "int mid(int x) { return leaf(x) + leaf(x); }\n"
     "int top(int x) { return mid(x) + ext(x); }\n"
     "int loop(int x) { return x ? loop(x - 1) : top(x); }\n"},
    {"b.c", "int leaf(int x) { return -x; }\nint user(int x) { return top(x); }\n"},
};

}  // namespace

TEST(CalleeTree, BreadthFirstWithDepthLimit) {
  const SyntaxIndex index = index_of(kGraph);
  const auto roots = index.functions_named("top");
  const CallTree t = build_callee_tree(roots, index, 5);
  check_invariants(t);
  ASSERT_EQ(t.nodes.size(), 4u);
  EXPECT_EQ(t.nodes[0].ref.name, "top");
  EXPECT_EQ(t.nodes[1].ref.name, "mid");
  EXPECT_EQ(t.nodes[1].depth, 1);
  EXPECT_EQ(t.nodes[2].depth, 2);
  EXPECT_EQ(t.edges.size(), 3u);
  EXPECT_TRUE(std::is_sorted(t.edges.begin(), t.edges.end()));

  const CallTree shallow = build_callee_tree(roots, index, 1);
  EXPECT_EQ(node_set(shallow), (NodeSet{{"a.c", "top"}, {"a.c", "mid"}}));
}

TEST(CalleeTree, CyclesTerminate) {
  const SyntaxIndex index = index_of(kGraph);
  const CallTree t = build_callee_tree(index.functions_named("loop"), index);
  check_invariants(t);
  EXPECT_EQ(node_set(t).size(), 5u);
}

TEST(CallerTree, DepthZeroHoldsDirectCallers) {
  const SyntaxIndex index = index_of(kGraph);
  const CallTree t = build_caller_tree({"mid"}, index, 5);
  check_invariants(t);
  EXPECT_EQ(t.direction, Direction::Caller);
  EXPECT_EQ(t.root_apis, std::vector<std::string>{"mid"});
  ASSERT_FALSE(t.nodes.empty());
  EXPECT_EQ(t.nodes[0].ref.name, "top");
  EXPECT_EQ(t.nodes[0].depth, 0);
  EXPECT_EQ(node_set(t), (NodeSet{{"a.c", "top"}, {"a.c", "loop"}, {"b.c", "user"}}));
  // Edges point from callee to caller.
  for (const auto& [from, to] : t.edges) EXPECT_NE(to.name, "top");
}

TEST(StaticToolExtractor, ConvertsMismatchedRoots) {
  const SyntaxIndex index = index_of(kGraph);
  const CallTree by_name = static_tool_extractor(std::vector<std::string>{"leaf"}, index, Direction::Callee);
  EXPECT_EQ(node_set(by_name), (NodeSet{{"a.c", "leaf"}, {"b.c", "leaf"}}));
  const CallTree by_ref = static_tool_extractor(index.functions_named("leaf"), index, Direction::Caller);
  EXPECT_EQ(by_ref.root_apis, std::vector<std::string>{"leaf"});
  EXPECT_TRUE(node_set(by_ref).count({"a.c", "mid"}));
}

TEST(CallTrees, MatchOraclesOnRandomRepos) {
  std::mt19937 rng(5);
  for (int trial = 0; trial < 40; ++trial) {
    const auto repo = vftest::random_repo(rng, 30, 4);
    const SyntaxIndex index = index_of(repo.render());
    ASSERT_TRUE(index.errors().empty());
    const int limit = std::uniform_int_distribution<int>(1, 5)(rng);
    const auto root = std::uniform_int_distribution<std::size_t>(0, repo.functions.size() - 1)(rng);
    const auto& fn = repo.functions[root];

    std::vector<FunctionRef> refs;
    for (const auto& r : index.functions_named(fn.name))
      if (r.file == repo.file_name(fn.file)) refs.push_back(r);
    const CallTree callee = build_callee_tree(refs, index, limit);
    check_invariants(callee);
    EXPECT_EQ(node_set(callee), vftest::reachable(repo, {root}, limit)) << "trial " << trial;

    const std::string api = std::uniform_int_distribution<int>(0, 4)(rng) == 0 ? "memcpy" : fn.name;
    const CallTree caller = build_caller_tree({api}, index, limit);
    check_invariants(caller);
    EXPECT_EQ(node_set(caller), caller_oracle(repo, api, limit)) << "trial " << trial;
  }
}

TEST(Snippets, DeletedLinesAndPureAdditions) {
  ChangedFile f;
  f.file_name = "m.c";
  f.code_before =
      "int a(int x)\n{\n  return x;\n}\n"           // 1-4
      "\n"                                           // 5
      "int b(int x)\n{\n  x++;\n  return x;\n}\n";  // 6-10
  f.code_after =
      "int a(int x)\n{\n  return x + 1;\n}\n"
      "\n"
      "int b(int x)\n{\n  x++;\n  check(x);\n  return x;\n}\n"
      "int c;\n";
  f.code_change = extract_hunks(f.code_before, f.code_after, 0);
  const FileIndex before = parse_source(f.file_name, f.code_before, Language::C);
  const FileIndex after = parse_source(f.file_name, f.code_after, Language::C);

  const auto snippets = make_snippets(f, before, &after);
  ASSERT_EQ(snippets.size(), 2u);
  EXPECT_EQ(snippets[0].lines, std::vector<int>{3});
  EXPECT_EQ(snippets[1].lines, (std::vector<int>{6, 7, 8, 9, 10}));
  EXPECT_EQ(make_snippets(f, before, nullptr).size(), 1u);
}

TEST(OutAndNearFunctions, FollowTheSnippet) {
  const auto fx = vftest::wrapper_fixture();
  SyntaxIndex index;
  index.add(parse_source("x.c", fx.before, Language::C), fx.before);
  const Snippet snip{"x.c", {13}};
  const auto out = get_out_func(snip, index);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].name, "checked_xmalloc");
  EXPECT_EQ(get_near_func(snip, index), std::vector<std::string>{"xmalloc"});
  EXPECT_TRUE(get_out_func({"x.c", {10}}, index).empty());
  EXPECT_EQ(get_top_level_functions("x.c", index).size(), 2u);
}

TEST(ExtractDependencies, OneTreePairPerSnippet) {
  const auto fx = vftest::wrapper_fixture();
  const RepoSnapshot snap = {{"x.c", fx.before}, {"user.c", "void *make(void) { return checked_xmalloc(1, 2); }\n"}};
  std::vector<ParseReport> errors;
  const Dependencies deps =
      extract_dependencies(Language::C, {{"x.c", {{"x.c", {13}}, {"x.c", {5}}}}}, snap, 5, &errors);
  EXPECT_TRUE(errors.empty());
  ASSERT_EQ(deps.callers.size(), 2u);
  ASSERT_EQ(deps.callees.size(), 2u);
  EXPECT_EQ(deps.callers[0].root_snippet, (RootSnippet{"x.c", {13, 13}}));
  EXPECT_EQ(node_set(deps.callers[0]), (NodeSet{{"x.c", "checked_xmalloc"}, {"user.c", "make"}}));
  EXPECT_EQ(node_set(deps.callees[0]), (NodeSet{{"x.c", "checked_xmalloc"}, {"x.c", "xmalloc"}}));

  const SyntaxIndex index = build_syntax_index(snap, Language::C);
  const std::string code = inter_procedural_code(deps.callees[0], index);
  EXPECT_EQ(code.find("void *checked_xmalloc"), code.find("void *"));
  EXPECT_NE(code.find("void *xmalloc(size_t n)"), std::string::npos);
}
