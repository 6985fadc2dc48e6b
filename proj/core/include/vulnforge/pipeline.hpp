#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "vulnforge/analyzers.hpp"
#include "vulnforge/cache.hpp"
#include "vulnforge/config.hpp"
#include "vulnforge/ingest.hpp"
#include "vulnforge/llm.hpp"
#include "vulnforge/syntax.hpp"
#include "vulnforge/types.hpp"

namespace vulnforge {

enum class Stage { Ingest, Untangle, Extract, Filter, Label };
std::string_view to_string(Stage stage);
std::optional<Stage> parse_stage(std::string_view text);

struct StageStats {
  std::size_t processed = 0;
  std::size_t cache_hits = 0;
  std::size_t failed = 0;
};

/// A skipped work item (skipped = true) or a degraded one that still
/// produced output.
struct RunIssue {
  std::string stage;
  std::string cve_id;
  std::string project;
  std::string commit_id;
  std::string kind;
  std::string message;
  bool skipped = false;
};

struct RunReport {
  std::size_t entries = 0;
  std::vector<LineError> entry_errors;
  std::map<std::string, StageStats> stages;
  std::vector<RunIssue> issues;
  std::vector<ParseReport> parse_failures;
  std::size_t records = 0;

  bool partial() const { return !entry_errors.empty() || !issues.empty(); }
  std::string to_json() const;
};

struct WorkItem {
  VulnEntry entry;
  Patch patch;
  bool untangled = false;
  std::vector<RepositoryContext> repository;
  std::optional<bool> outdated;
};

struct PipelineServices {
  PatchSource* source = nullptr;
  LlmClient* llm = nullptr;
  const AnalyzerRegistry* analyzers = nullptr;
  AnalyzerMatrix matrix = AnalyzerMatrix::standard();
  StageCache cache;
  // Identifies the LLM answers (transcript digest, model), so cached
  // verdicts are not reused across different answer sources.
  std::string llm_tag;
};

struct PipelineResult {
  std::vector<WorkItem> items;        // surviving items after the last stage run
  std::vector<DatasetRecord> records;  // filled when the label stage ran, export order
  RunReport report;
};

/// Runs ingest -> untangle -> extract -> filter -> label, stopping after
/// `last`. Item-level failures are reported and the item is dropped; fatal
/// errors (unreadable entries file, cache I/O) propagate.
PipelineResult run_pipeline(const Config& config, PipelineServices& services, Stage last = Stage::Label);

/// Writes the output of `stage`: the dataset for Label, otherwise one JSON
/// line per item with the fields known at that point.
void write_stage_output(const PipelineResult& result, Stage stage, const std::filesystem::path& path);

/// Builds the LLM client described by the config; `tag` receives a value for
/// PipelineServices::llm_tag.
std::unique_ptr<LlmClient> make_llm_client(const LlmConfig& config, std::string& tag);
AnalyzerRegistry make_analyzer_registry(const AnalyzerConfig& config);

}  // namespace vulnforge
