#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

namespace vulnforge {

/// File-backed stage cache. Each (commit, stage, fingerprint) key maps to one
/// file written atomically, so concurrent readers never see partial values
/// and distinct keys can be written concurrently.
class StageCache {
 public:
  /// An empty root disables caching.
  explicit StageCache(std::filesystem::path root = {});

  bool enabled() const { return !root_.empty(); }
  std::optional<std::string> get(std::string_view commit_id, std::string_view stage,
                                 std::string_view fingerprint) const;
  void put(std::string_view commit_id, std::string_view stage, std::string_view fingerprint,
           std::string_view value) const;

 private:
  std::filesystem::path path_for(std::string_view commit_id, std::string_view stage,
                                 std::string_view fingerprint) const;
  std::filesystem::path root_;
};

}  // namespace vulnforge
