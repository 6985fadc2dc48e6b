#include "vulnforge/http_client.hpp"

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <cstdlib>
#include <thread>

#include "httplib.h"
#include "json.hpp"
#include "vulnforge/error.hpp"

namespace vulnforge {

HttpChatClient::HttpChatClient(HttpChatOptions options) : options_(std::move(options)) {
  if (options_.api_key.empty())
    if (const char* key = std::getenv("VULNFORGE_LLM_KEY")) options_.api_key = key;
  if (options_.requests_per_minute <= 0) options_.requests_per_minute = 60.0;
}

HttpChatClient::~HttpChatClient() = default;

void HttpChatClient::wait_for_slot() {
  const auto interval = std::chrono::duration_cast<std::chrono::steady_clock::duration>(
      std::chrono::duration<double>(60.0 / options_.requests_per_minute));
  std::chrono::steady_clock::time_point slot;
  {
    std::lock_guard lock(rate_mutex_);
    const auto now = std::chrono::steady_clock::now();
    slot = std::max(now, next_slot_);
    next_slot_ = slot + interval;
  }
  std::this_thread::sleep_until(slot);
}

std::string HttpChatClient::complete(const std::string& prompt) {
  const nlohmann::json body{
      {"model", options_.model},
      {"temperature", 0},
      {"messages", nlohmann::json::array({{{"role", "user"}, {"content", prompt}}})},
  };
  httplib::Headers headers;
  if (!options_.api_key.empty()) headers.emplace("Authorization", "Bearer " + options_.api_key);

  std::string last_error;
  for (int attempt = 0; attempt <= options_.retries; ++attempt) {
    wait_for_slot();
    httplib::Client client(options_.base_url);
    client.set_connection_timeout(options_.timeout);
    client.set_read_timeout(options_.timeout);
    const auto res = client.Post("/v1/chat/completions", headers, body.dump(), "application/json");
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status != 200) {
      last_error = "HTTP " + std::to_string(res->status);
      if (res->status >= 500 || res->status == 429) continue;
      break;
    }
    try {
      const auto j = nlohmann::json::parse(res->body);
      return j.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::ClientError, std::string("unexpected response body: ") + e.what());
    }
  }
  throw Error(ErrorKind::ClientError, last_error);
}

}  // namespace vulnforge
