#include "vulnforge/llm.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cctype>
#include <fstream>

#include "json.hpp"
#include "vulnforge/diff.hpp"
#include "vulnforge/error.hpp"

namespace vulnforge {

namespace {

constexpr std::string_view kSystem =
    "You are a security analyst reviewing one file of a vulnerability-fixing commit.";
constexpr std::string_view kInstruction =
    "Do the code changes in this file fix the vulnerability described above? Answer with \"YES\" or \"NO\".";

const char* kCweDescription = "## CWE Description\n";
const char* kCommitMessage = "## Commit Message\n";
const char* kFunctions = "## Functions\n";
const char* kCodeChange = "# Code Change\n";

std::string or_missing(const std::string& text) {
  return text.empty() ? std::string(kNotAvailable) : text;
}

std::size_t token_estimate(const std::string& text) { return (text.size() + 3) / 4; }

std::string lower(std::string_view text) {
  std::string out(text);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

std::string_view section(std::string_view text, std::string_view begin, std::string_view end) {
  const auto b = text.find(begin);
  if (b == std::string_view::npos) return {};
  const auto start = b + begin.size();
  const auto e = text.find(end, start);
  return text.substr(start, e == std::string_view::npos ? std::string_view::npos : e - start);
}

}  // namespace

std::string PromptBundle::render() const {
  std::string out;
  out += "# System\n";
  out += system_text;
  out += "\n\n# Context\n";
  out += kCweDescription;
  out += cwe_description;
  out += "\n## CWE Solution\n";
  out += cwe_solution;
  out += '\n';
  out += kCommitMessage;
  out += commit_message;
  if (!commit_message.empty() && commit_message.back() != '\n') out += '\n';
  out += kFunctions;
  if (functions.empty()) out += std::string(kNotAvailable) + "\n";
  for (const auto& fn : functions) {
    out += "```\n";
    out += fn;
    if (!fn.empty() && fn.back() != '\n') out += '\n';
    out += "```\n";
  }
  out += '\n';
  out += kCodeChange;
  out += code_change;
  out += "\n# Answer\n";
  out += answer_instruction;
  out += '\n';
  return out;
}

PromptBundle build_prompt(const VulnEntry& entry, const Patch& patch, const ChangedFile& file,
                          const std::vector<FunctionRecord>& affected_functions, const PromptOptions& options) {
  if (file.code_change.empty())
    throw Error(ErrorKind::EmptyChange, file.file_name + " in " + patch.commit_id + " has no code change");

  PromptBundle p;
  p.system_text = std::string(kSystem);
  p.cwe_description = or_missing(entry.cwe_id.empty() ? std::string{} : entry.cwe_description);
  p.cwe_solution = or_missing(entry.cwe_id.empty() ? std::string{} : entry.cwe_solution);
  p.commit_message = patch.commit_message;
  p.code_change = render_unified(file.file_name, file.code_change);
  p.answer_instruction = std::string(kInstruction);

  std::vector<std::size_t> keep(affected_functions.size());
  for (std::size_t i = 0; i < keep.size(); ++i) keep[i] = i;
  std::size_t total = 0;
  for (const auto& fn : affected_functions) total += token_estimate(fn.content);
  while (total > options.max_function_tokens && !keep.empty()) {
    // Longest first; the earliest one wins a tie.
    auto longest = std::max_element(keep.begin(), keep.end(), [&](std::size_t a, std::size_t b) {
      return affected_functions[a].content.size() < affected_functions[b].content.size();
    });
    total -= token_estimate(affected_functions[*longest].content);
    keep.erase(longest);
  }
  for (std::size_t i : keep) p.functions.push_back(affected_functions[i].content);
  return p;
}

LlmVerdict parse_llm_response(std::string_view response) {
  bool yes = false, no = false;
  std::size_t i = 0;
  while (i < response.size()) {
    if (!std::isalpha(static_cast<unsigned char>(response[i]))) {
      ++i;
      continue;
    }
    const std::size_t start = i;
    while (i < response.size() && std::isalpha(static_cast<unsigned char>(response[i]))) ++i;
    const std::string word = lower(response.substr(start, i - start));
    if (word == "yes") yes = true;
    if (word == "no") no = true;
  }
  if (yes == no) return LlmVerdict::Unknown;
  return yes ? LlmVerdict::Yes : LlmVerdict::No;
}

std::string prompt_hash(std::string_view prompt) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(prompt.data(), prompt.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw Error(ErrorKind::ClientError, "SHA-256 digest failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned int k = 0; k < len; ++k) {
    out.push_back(hex[digest[k] >> 4]);
    out.push_back(hex[digest[k] & 0xF]);
  }
  return out;
}

LlmOutcome llm_evaluate(const PromptBundle& prompt, LlmClient& client) {
  LlmOutcome out;
  try {
    out.response = client.complete(prompt.render());
    out.verdict = parse_llm_response(out.response);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::ClientError) throw;
    out.verdict = LlmVerdict::Unknown;
    out.error = e.what();
  }
  return out;
}

MockLlmClient::MockLlmClient()
    : keywords_{"overflow", "bound", "check", "size", "len", "free", "null", "valid", "sanitize", "escape"} {}

std::string MockLlmClient::complete(const std::string& prompt) {
  const std::string_view text(prompt);
  const std::string_view diff = section(text, kCodeChange, "\n# Answer\n");
  std::string path;
  if (diff.substr(0, 6) == "--- a/") path = std::string(diff.substr(6, diff.find('\n') - 6));

  const std::string_view message = section(text, kCommitMessage, kFunctions);
  std::size_t pos = 0;
  while (pos < message.size()) {
    const auto nl = message.find('\n', pos);
    std::string_view line = message.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? message.size() : nl + 1;
    constexpr std::string_view tag = "LLM-Verdict:";
    if (line.substr(0, tag.size()) != tag) continue;
    line.remove_prefix(tag.size());
    while (!line.empty() && line.front() == ' ') line.remove_prefix(1);
    while (!line.empty() && (line.back() == ' ' || line.back() == '\r')) line.remove_suffix(1);
    const auto space = line.rfind(' ');
    if (space == std::string_view::npos) continue;
    if (line.substr(0, space) == path) return std::string(line.substr(space + 1));
  }

  // Changed lines only; headers and context do not count.
  std::size_t p = 0;
  while (p < diff.size()) {
    const auto nl = diff.find('\n', p);
    const std::string_view line = diff.substr(p, nl == std::string_view::npos ? std::string_view::npos : nl - p);
    p = nl == std::string_view::npos ? diff.size() : nl + 1;
    if (line.empty() || (line[0] != '+' && line[0] != '-')) continue;
    if (line.substr(0, 4) == "--- " || line.substr(0, 4) == "+++ ") continue;
    const std::string l = lower(line);
    for (const auto& k : keywords_)
      if (l.find(k) != std::string::npos) return "YES";
  }
  return "NO";
}

ReplayClient::ReplayClient(const std::filesystem::path& transcript) {
  std::ifstream in(transcript, std::ios::binary);
  if (!in) throw Error(ErrorKind::SourceUnreadable, "cannot open transcript " + transcript.string());
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      responses_[j.at("prompt_hash").get<std::string>()] = j.at("response_text").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::ParseFailure,
                  transcript.string() + ":" + std::to_string(n) + ": " + e.what());
    }
  }
}

std::string ReplayClient::complete(const std::string& prompt) {
  const auto it = responses_.find(prompt_hash(prompt));
  if (it == responses_.end()) throw Error(ErrorKind::ClientError, "prompt not in transcript");
  return it->second;
}

RecordingClient::RecordingClient(std::unique_ptr<LlmClient> inner, std::filesystem::path transcript)
    : inner_(std::move(inner)), transcript_(std::move(transcript)) {}

std::string RecordingClient::complete(const std::string& prompt) {
  std::string response = inner_->complete(prompt);
  const nlohmann::json j{{"prompt_hash", prompt_hash(prompt)}, {"response_text", response}};
  std::lock_guard lock(mutex_);
  std::ofstream out(transcript_, std::ios::binary | std::ios::app);
  if (!out) throw Error(ErrorKind::IoError, "cannot write transcript " + transcript_.string());
  out << j.dump() << '\n';
  return response;
}

}  // namespace vulnforge
