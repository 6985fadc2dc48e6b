#include <benchmark/benchmark.h>

#include <random>
#include <string>

#include "vulnforge/diff.hpp"

namespace {

std::string make_text(std::mt19937& rng, int lines, int alphabet) {
  std::string out;
  for (int i = 0; i < lines; ++i) out += "line" + std::to_string(rng() % alphabet) + "\n";
  return out;
}

std::string edit(std::mt19937& rng, const std::string& text, double rate) {
  std::string out;
  std::size_t pos = 0;
  std::bernoulli_distribution touch(rate);
  while (pos < text.size()) {
    const std::size_t end = text.find('\n', pos) + 1;
    if (!touch(rng)) out.append(text, pos, end - pos);
    else if (rng() % 2) out += "edited" + std::to_string(rng()) + "\n";
    pos = end;
  }
  return out;
}

void BM_ExtractHunks(benchmark::State& state) {
  std::mt19937 rng(11);
  const std::string before = make_text(rng, static_cast<int>(state.range(0)), 200);
  const std::string after = edit(rng, before, 0.05);
  for (auto _ : state) benchmark::DoNotOptimize(vulnforge::extract_hunks(before, after));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_ExtractHunks)->RangeMultiplier(4)->Range(256, 16384)->Complexity();

void BM_ApplyHunks(benchmark::State& state) {
  std::mt19937 rng(12);
  const std::string before = make_text(rng, 4096, 200);
  const std::string after = edit(rng, before, 0.05);
  const auto hunks = vulnforge::extract_hunks(before, after);
  for (auto _ : state) benchmark::DoNotOptimize(vulnforge::apply_hunks(before, hunks));
}
BENCHMARK(BM_ApplyHunks);

}  // namespace
