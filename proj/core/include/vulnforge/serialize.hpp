#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "vulnforge/types.hpp"

namespace vulnforge {

// JSON-lines codecs. Field names follow the dataset tables: "CVE-ID",
// "Commit-ID", "File-Name", "LLMs-Evaluate", "Static-Check", "Target",
// "Inter-procedural Code", "Line", "Line-Number", "Function", ...

/// Parses and validates one entries-file line. Throws Error{MalformedEntry}.
VulnEntry parse_entry_line(std::string_view line);
std::string entry_to_line(const VulnEntry& entry);

std::string patch_to_line(const Patch& patch);
Patch patch_from_line(std::string_view line);

std::string record_to_line(const DatasetRecord& record);
DatasetRecord record_from_line(std::string_view line);

/// Orders by (publish_date, cve_id, commit_id).
void sort_records(std::vector<DatasetRecord>& records);

/// One record per line in export order. Throws Error{IoError}.
void export_dataset(std::vector<DatasetRecord> records, const std::filesystem::path& path);
std::vector<DatasetRecord> import_dataset(const std::filesystem::path& path);

}  // namespace vulnforge
