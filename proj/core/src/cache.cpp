#include "vulnforge/cache.hpp"

#include <unistd.h>

#include <atomic>
#include <fstream>
#include <sstream>

#include "vulnforge/error.hpp"
#include "vulnforge/llm.hpp"

namespace vulnforge {

StageCache::StageCache(std::filesystem::path root) : root_(std::move(root)) {}

std::filesystem::path StageCache::path_for(std::string_view commit_id, std::string_view stage,
                                           std::string_view fingerprint) const {
  std::string key(commit_id);
  key += '\x1f';
  key += stage;
  key += '\x1f';
  key += fingerprint;
  return root_ / std::string(stage) / (prompt_hash(key) + ".json");
}

std::optional<std::string> StageCache::get(std::string_view commit_id, std::string_view stage,
                                           std::string_view fingerprint) const {
  if (!enabled()) return std::nullopt;
  std::ifstream in(path_for(commit_id, stage, fingerprint), std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void StageCache::put(std::string_view commit_id, std::string_view stage, std::string_view fingerprint,
                     std::string_view value) const {
  if (!enabled()) return;
  static std::atomic<unsigned> counter{0};
  const auto target = path_for(commit_id, stage, fingerprint);
  std::error_code ec;
  std::filesystem::create_directories(target.parent_path(), ec);
  if (ec) throw Error(ErrorKind::IoError, "cannot create cache directory " + target.parent_path().string());
  auto tmp = target;
  tmp += ".tmp." + std::to_string(::getpid()) + "." + std::to_string(counter++);
  {
    std::ofstream out(tmp, std::ios::binary);
    out.write(value.data(), static_cast<std::streamsize>(value.size()));
    if (!out) throw Error(ErrorKind::IoError, "cannot write cache entry " + tmp.string());
  }
  std::filesystem::rename(tmp, target, ec);
  if (ec) throw Error(ErrorKind::IoError, "cannot commit cache entry " + target.string());
}

}  // namespace vulnforge
