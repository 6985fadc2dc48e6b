#include "vulnforge/untangle.hpp"

#include "vulnforge/error.hpp"
#include "vulnforge/labeling.hpp"

namespace vulnforge {

JointVerdict joint_decision(LlmVerdict llm, StaticVerdict stat) {
  if (llm == LlmVerdict::Yes && stat == StaticVerdict::Related) return JointVerdict::Related;
  if (llm == LlmVerdict::No && stat == StaticVerdict::Unrelated) return JointVerdict::Unrelated;
  return JointVerdict::Excluded;
}

FileVerdict untangle_file(const VulnEntry& entry, const Patch& patch, const ChangedFile& file, LlmClient& llm,
                          const AnalyzerMatrix& matrix, const AnalyzerRegistry& registry,
                          const UntangleOptions& options) {
  FileVerdict v;
  if (file.code_change.empty()) {
    v.notes.push_back("no code change; LLM skipped");
  } else {
    const FileVersions versions = index_versions(file);
    const auto affected = affected_functions(file, versions.before, versions.after);
    v.llm = llm_evaluate(build_prompt(entry, patch, file, affected, options.prompt), llm);
    if (v.llm.error) v.notes.push_back("llm: " + *v.llm.error);
  }
  try {
    v.analysis = run_analyzers(file, matrix, registry);
    v.static_verdict = static_verdict(v.analysis, file, options.match_slack);
    for (const auto& f : v.analysis.failures) v.notes.push_back(f.tool + ": " + f.message);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::AllAnalyzersFailed) throw;
    v.static_verdict = StaticVerdict::NotApplicable;
    v.notes.push_back(e.what());
  }
  v.joint = joint_decision(v.llm.verdict, v.static_verdict);
  return v;
}

void apply_verdict(ChangedFile& file, const FileVerdict& verdict) {
  file.llm_verdict = verdict.llm.verdict;
  file.static_verdict = verdict.static_verdict;
  file.joint = verdict.joint;
  file.target = verdict.joint == JointVerdict::Related ? Label::Vulnerable : Label::NonVulnerable;
}

}  // namespace vulnforge
