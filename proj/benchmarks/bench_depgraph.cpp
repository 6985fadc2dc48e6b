#include <benchmark/benchmark.h>

#include <string>

#include "vulnforge/depgraph.hpp"
#include "vulnforge/syntax.hpp"

namespace {

// A layered call graph: function k in layer l calls two functions of layer l + 1.
vulnforge::RepoSnapshot layered_repo(int layers, int width) {
  vulnforge::RepoSnapshot repo;
  for (int l = 0; l < layers; ++l) {
    std::string text;
    for (int k = 0; k < width; ++k) {
      text += "int f" + std::to_string(l) + "_" + std::to_string(k) + "(int x)\n{\n";
      if (l + 1 < layers)
        for (int d : {0, 1})
          text += "  x += f" + std::to_string(l + 1) + "_" + std::to_string((k + d) % width) + "(x);\n";
      text += "  return x;\n}\n\n";
    }
    repo["src/layer" + std::to_string(l) + ".c"] = text;
  }
  return repo;
}

void BM_BuildSyntaxIndex(benchmark::State& state) {
  const auto repo = layered_repo(8, static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(vulnforge::build_syntax_index(repo, vulnforge::Language::C));
  state.SetItemsProcessed(state.iterations() * 8 * state.range(0));
}
BENCHMARK(BM_BuildSyntaxIndex)->Range(8, 512);

void BM_CalleeTree(benchmark::State& state) {
  const auto repo = layered_repo(8, 256);
  const auto index = vulnforge::build_syntax_index(repo, vulnforge::Language::C);
  const auto roots = index.functions_named("f0_0");
  const int depth = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(vulnforge::build_callee_tree(roots, index, depth));
}
BENCHMARK(BM_CalleeTree)->DenseRange(1, 7, 2);

void BM_CallerTree(benchmark::State& state) {
  const auto repo = layered_repo(8, 256);
  const auto index = vulnforge::build_syntax_index(repo, vulnforge::Language::C);
  for (auto _ : state) benchmark::DoNotOptimize(vulnforge::build_caller_tree({"f7_0"}, index, 7));
}
BENCHMARK(BM_CallerTree);

}  // namespace
