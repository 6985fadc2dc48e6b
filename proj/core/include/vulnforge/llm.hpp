#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vulnforge/types.hpp"

namespace vulnforge {

struct PromptBundle {
  std::string system_text;
  std::string cwe_description;
  std::string cwe_solution;
  std::string commit_message;
  std::vector<std::string> functions;  // source order
  std::string code_change;             // unified diff
  std::string answer_instruction;

  /// System, context (CWE description, CWE solution, commit message,
  /// functions), code change, answer instruction.
  std::string render() const;
};

struct PromptOptions {
  // Approximate budget for the functions section, at four characters per token.
  std::size_t max_function_tokens = 2048;
};

inline constexpr std::string_view kNotAvailable = "(not available)";

/// Throws Error{EmptyChange} when the file has no hunks. Functions over the
/// token budget are evicted longest first; survivors keep their order.
PromptBundle build_prompt(const VulnEntry& entry, const Patch& patch, const ChangedFile& file,
                          const std::vector<FunctionRecord>& affected_functions, const PromptOptions& options = {});

/// Case-insensitive whole-word search for YES and NO. Exactly one of the two
/// decides; both or neither give Unknown.
LlmVerdict parse_llm_response(std::string_view response);

/// Hex SHA-256 of the rendered prompt.
std::string prompt_hash(std::string_view prompt);

class LlmClient {
 public:
  virtual ~LlmClient() = default;
  /// Throws Error{ClientError} on transport failure.
  virtual std::string complete(const std::string& prompt) = 0;
};

struct LlmOutcome {
  LlmVerdict verdict = LlmVerdict::Unknown;
  std::string response;
  std::optional<std::string> error;
};

/// Client errors degrade to Unknown with the message kept in `error`.
LlmOutcome llm_evaluate(const PromptBundle& prompt, LlmClient& client);

/// Offline stand-in. Looks for "LLM-Verdict: <path> YES|NO" lines in the
/// commit message section, keyed by the path on the prompt's "--- a/" line.
/// Without an annotation it answers YES when a changed line mentions one of
/// the keywords, NO otherwise.
class MockLlmClient : public LlmClient {
 public:
  MockLlmClient();
  explicit MockLlmClient(std::vector<std::string> keywords) : keywords_(std::move(keywords)) {}
  std::string complete(const std::string& prompt) override;

 private:
  std::vector<std::string> keywords_;
};

/// Answers from a JSON-lines transcript of {prompt_hash, response_text}.
/// Unknown prompts raise Error{ClientError}.
class ReplayClient : public LlmClient {
 public:
  explicit ReplayClient(const std::filesystem::path& transcript);
  std::string complete(const std::string& prompt) override;
  std::size_t size() const { return responses_.size(); }

 private:
  std::map<std::string, std::string> responses_;
};

/// Forwards to `inner` and appends every exchange to the transcript.
class RecordingClient : public LlmClient {
 public:
  RecordingClient(std::unique_ptr<LlmClient> inner, std::filesystem::path transcript);
  std::string complete(const std::string& prompt) override;

 private:
  std::unique_ptr<LlmClient> inner_;
  std::filesystem::path transcript_;
  std::mutex mutex_;
};

}  // namespace vulnforge
