#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vulnforge/ingest.hpp"

namespace vulnforge {

struct LlmConfig {
  std::string mode = "mock";  // mock | http | replay
  std::string base_url = "https://api.openai.com";
  std::string model = "gpt-3.5-turbo";
  std::optional<std::filesystem::path> transcript;  // replay input
  std::optional<std::filesystem::path> record;      // transcript output
  std::size_t max_function_tokens = 2048;
  double requests_per_minute = 60.0;
};

struct AnalyzerConfig {
  std::string mode = "mock";  // mock | tools
  std::vector<std::string> dangerous;
  std::map<std::string, std::string> binaries;  // tool name -> executable
  std::string semgrep_config = "auto";
  int match_slack = 0;
};

struct CallgraphConfig {
  std::string backend = "builtin";
  int depth_limit = 5;
};

struct FilterConfig {
  std::vector<std::string> suffixes;  // empty means the default blacklist
  std::optional<int> window_days;
};

struct WorkerConfig {
  std::size_t ingest = 4;
  std::size_t untangle = 4;
  std::size_t extract = 2;
  std::size_t filter = 4;
  std::size_t label = 4;
};

struct Config {
  SourceConfig source;
  LlmConfig llm;
  AnalyzerConfig analyzers;
  CallgraphConfig callgraph;
  FilterConfig filter;
  std::filesystem::path out = "dataset.jsonl";
  WorkerConfig workers;

  /// Hex digest of every setting that can change the output of `stage`
  /// (ingest, untangle, extract, filter, label), including upstream stages.
  std::string fingerprint(std::string_view stage) const;
};

/// Relative paths resolve against `base_dir`. Throws Error{ConfigError}.
Config parse_config(std::string_view toml_text, const std::filesystem::path& base_dir);
Config load_config(const std::filesystem::path& path);

}  // namespace vulnforge
