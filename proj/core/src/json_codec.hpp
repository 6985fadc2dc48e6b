#pragma once

// nlohmann/json conversions shared by the serializers and the stage cache.
// Field names follow the published dataset layout.

#include "json.hpp"
#include "vulnforge/types.hpp"

namespace vulnforge::codec {

using Json = nlohmann::ordered_json;

Json to_json(const VulnEntry& entry);
VulnEntry entry_from_json(const Json& j);

Json to_json(const Hunk& hunk);
Hunk hunk_from_json(const Json& j);

Json to_json(const ChangedFile& file);
ChangedFile file_from_json(const Json& j);

// Patch-level fields only; files are written by the caller.
void write_patch_fields(Json& j, const Patch& patch);
Patch patch_fields_from_json(const Json& j);

Json to_json(const Patch& patch);
Patch patch_from_json(const Json& j);

Json to_json(const FunctionRecord& record);
FunctionRecord function_from_json(const Json& j);

Json to_json(const LineRecord& record);
LineRecord line_from_json(const Json& j);

Json to_json(const CallTree& tree);
CallTree tree_from_json(const Json& j);

Json to_json(const RepositoryContext& ctx);
RepositoryContext context_from_json(const Json& j);

Json to_json(const Finding& finding);
Finding finding_from_json(const Json& j);

Json to_json(const DatasetRecord& record);
DatasetRecord record_from_json(const Json& j);

}  // namespace vulnforge::codec
