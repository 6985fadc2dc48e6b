#pragma once

#include <chrono>
#include <memory>
#include <mutex>
#include <string>

#include "vulnforge/llm.hpp"

namespace vulnforge {

struct HttpChatOptions {
  std::string base_url = "https://api.openai.com";  // scheme://host[:port]
  std::string model = "gpt-3.5-turbo";
  std::string api_key;  // defaults to $VULNFORGE_LLM_KEY when empty
  double requests_per_minute = 60.0;
  std::chrono::seconds timeout{60};
  int retries = 1;
};

/// OpenAI-style /v1/chat/completions client with temperature 0.
class HttpChatClient : public LlmClient {
 public:
  explicit HttpChatClient(HttpChatOptions options);
  ~HttpChatClient() override;
  std::string complete(const std::string& prompt) override;

 private:
  void wait_for_slot();

  HttpChatOptions options_;
  std::mutex rate_mutex_;
  std::chrono::steady_clock::time_point next_slot_{};
};

}  // namespace vulnforge
