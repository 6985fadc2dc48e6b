#pragma once

#include <optional>
#include <string>
#include <vector>

#include "vulnforge/analyzers.hpp"
#include "vulnforge/llm.hpp"
#include "vulnforge/types.hpp"

namespace vulnforge {

/// (Yes, Related) -> Related, (No, Unrelated) -> Unrelated, else Excluded.
JointVerdict joint_decision(LlmVerdict llm, StaticVerdict stat);

struct UntangleOptions {
  PromptOptions prompt;
  int match_slack = 0;
};

struct FileVerdict {
  LlmOutcome llm;
  AnalysisResult analysis;
  StaticVerdict static_verdict = StaticVerdict::NotApplicable;
  JointVerdict joint = JointVerdict::Excluded;
  // Set when a stage degraded (empty change, all analyzers failed).
  std::vector<std::string> notes;
};

/// Evaluates one file. Files without hunks skip the LLM (Unknown); files
/// whose analyzers all fail get NotApplicable. Both end up Excluded.
FileVerdict untangle_file(const VulnEntry& entry, const Patch& patch, const ChangedFile& file, LlmClient& llm,
                          const AnalyzerMatrix& matrix, const AnalyzerRegistry& registry,
                          const UntangleOptions& options = {});

/// Copies the verdicts of `verdict` into `file` and sets its before label.
void apply_verdict(ChangedFile& file, const FileVerdict& verdict);

}  // namespace vulnforge
