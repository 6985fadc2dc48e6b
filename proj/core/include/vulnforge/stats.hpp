#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "vulnforge/types.hpp"

namespace vulnforge {

struct OutdatedBucket {
  std::size_t outdated = 0;
  std::size_t total = 0;
  double ratio() const { return total == 0 ? 0.0 : static_cast<double>(outdated) / static_cast<double>(total); }
  friend bool operator==(const OutdatedBucket&, const OutdatedBucket&) = default;
};

struct OutdatedReport {
  std::size_t total = 0;
  std::size_t outdated = 0;
  std::map<std::string, OutdatedBucket> by_cwe;  // "(none)" for entries without CWE
  std::map<int, OutdatedBucket> by_year;         // patch commit year
  std::map<std::string, OutdatedBucket> by_project;
  std::map<std::string, OutdatedBucket> by_language;
  // Share of outdated patches per language; sums to 1 when any are outdated.
  std::map<std::string, double> language_share;
};

OutdatedReport outdated_breakdown(const std::vector<DatasetRecord>& records);
/// Merges partial reports computed over disjoint record sets.
OutdatedReport merge_reports(const std::vector<OutdatedReport>& parts);

std::string report_to_json(const OutdatedReport& report);
/// Aligned columns: dimension, key, outdated, total, ratio.
std::string report_to_table(const OutdatedReport& report);

}  // namespace vulnforge
