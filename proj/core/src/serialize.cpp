#include "vulnforge/serialize.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "json_codec.hpp"
#include "vulnforge/error.hpp"

namespace vulnforge {

namespace codec {

namespace {

[[noreturn]] void bad_field(const std::string& field, const std::string& why) {
  throw Error(ErrorKind::MalformedEntry, "field '" + field + "': " + why);
}

const Json& require(const Json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end()) bad_field(key, "missing");
  return *it;
}

std::string str(const Json& j, const char* key, bool required = false) {
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) {
    if (required) bad_field(key, "missing");
    return {};
  }
  if (!it->is_string()) bad_field(key, "expected a string");
  return it->get<std::string>();
}

std::optional<std::string> opt_str(const Json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) bad_field(key, "expected a string or null");
  return it->get<std::string>();
}

long long integer(const Json& j, const char* key) {
  const auto& v = require(j, key);
  if (!v.is_number_integer()) bad_field(key, "expected an integer");
  return v.get<long long>();
}

bool boolean(const Json& j, const char* key, bool fallback) {
  const auto it = j.find(key);
  if (it == j.end()) return fallback;
  if (!it->is_boolean()) bad_field(key, "expected a boolean");
  return it->get<bool>();
}

std::string date_text(Timestamp ts) {
  const auto s = format_timestamp(ts);
  return s.substr(10) == "T00:00:00Z" ? s.substr(0, 10) : s;
}

Language language(const Json& j, const char* key) {
  const auto text = str(j, key, true);
  const auto lang = parse_language(text);
  if (!lang) bad_field(key, "unknown language '" + text + "'");
  return *lang;
}

Label label(const Json& j, const char* key) {
  const auto l = label_from_int(integer(j, key));
  if (!l) bad_field(key, "label must be 0 or 1");
  return *l;
}

template <typename Parser>
auto enum_field(const Json& j, const char* key, Parser parse) {
  const auto text = str(j, key, true);
  const auto value = parse(text);
  if (!value) bad_field(key, "unexpected value '" + text + "'");
  return *value;
}

Json line_change_json(const LineChange& lc) {
  Json j;
  j["Kind"] = std::string(to_string(lc.kind));
  j["Line"] = lc.content;
  j["Line-Number"] = lc.line_number;
  if (!lc.newline) j["Missing-Newline"] = true;
  return j;
}

LineChange line_change_from_json(const Json& j) {
  LineChange lc;
  lc.kind = enum_field(j, "Kind", parse_change_kind);
  lc.content = str(j, "Line");
  lc.line_number = static_cast<int>(integer(j, "Line-Number"));
  lc.newline = !boolean(j, "Missing-Newline", false);
  return lc;
}

Json function_ref_json(const FunctionRef& ref) {
  Json j;
  j["File"] = ref.file;
  j["Name"] = ref.name;
  j["Start-Line"] = ref.span.start;
  j["End-Line"] = ref.span.end;
  return j;
}

FunctionRef function_ref_from_json(const Json& j) {
  return {str(j, "File", true), str(j, "Name", true),
          {static_cast<int>(integer(j, "Start-Line")), static_cast<int>(integer(j, "End-Line"))}};
}

}  // namespace

Json to_json(const VulnEntry& e) {
  Json j;
  j["CVE-ID"] = e.cve_id;
  j["CWE-ID"] = e.cwe_id;
  j["Language"] = std::string(to_string(e.language));
  j["Resource"] = e.resources;
  j["CVE Description"] = e.cve_description;
  j["Publish-Date"] = date_text(e.publish_date);
  j["CVSS"] = e.cvss;
  j["CVE-AV"] = e.av;
  j["CVE-AC"] = e.ac;
  j["CVE-PR"] = e.pr;
  j["CVE-UI"] = e.ui;
  j["CVE-S"] = e.s;
  j["CVE-C"] = e.c;
  j["CVE-I"] = e.i;
  j["CVE-A"] = e.a;
  j["CWE Description"] = e.cwe_description;
  j["CWE Solution"] = e.cwe_solution;
  j["CWE Consequence"] = e.cwe_consequence;
  j["CWE Method"] = e.cwe_method;
  Json commits = Json::array();
  for (const auto& c : e.commits) commits.push_back({{"project", c.project}, {"commit_id", c.commit_id}});
  j["Commits"] = std::move(commits);
  return j;
}

VulnEntry entry_from_json(const Json& j) {
  if (!j.is_object()) throw Error(ErrorKind::MalformedEntry, "entry is not a JSON object");
  VulnEntry e;
  e.cve_id = str(j, "CVE-ID", true);
  e.cwe_id = str(j, "CWE-ID");
  e.language = language(j, "Language");
  if (const auto it = j.find("Resource"); it != j.end() && !it->is_null()) {
    if (it->is_string()) {
      e.resources.push_back(it->get<std::string>());
    } else if (it->is_array()) {
      for (const auto& r : *it) {
        if (!r.is_string()) bad_field("Resource", "expected strings");
        e.resources.push_back(r.get<std::string>());
      }
    } else {
      bad_field("Resource", "expected a list of URLs");
    }
  }
  e.cve_description = str(j, "CVE Description");
  e.publish_date = parse_timestamp(str(j, "Publish-Date", true));
  const auto& cvss = require(j, "CVSS");
  if (cvss.is_number()) {
    e.cvss = cvss.get<double>();
  } else if (cvss.is_string()) {
    try {
      std::size_t used = 0;
      const auto text = cvss.get<std::string>();
      e.cvss = std::stod(text, &used);
      if (used != text.size()) bad_field("CVSS", "not a number");
    } catch (const std::logic_error&) {
      bad_field("CVSS", "not a number");
    }
  } else {
    bad_field("CVSS", "not a number");
  }
  e.av = str(j, "CVE-AV");
  e.ac = str(j, "CVE-AC");
  e.pr = str(j, "CVE-PR");
  e.ui = str(j, "CVE-UI");
  e.s = str(j, "CVE-S");
  e.c = str(j, "CVE-C");
  e.i = str(j, "CVE-I");
  e.a = str(j, "CVE-A");
  e.cwe_description = str(j, "CWE Description");
  e.cwe_solution = str(j, "CWE Solution");
  e.cwe_consequence = str(j, "CWE Consequence");
  e.cwe_method = str(j, "CWE Method");
  if (const auto it = j.find("Commits"); it != j.end() && !it->is_null()) {
    if (!it->is_array()) bad_field("Commits", "expected a list");
    for (const auto& c : *it) {
      if (!c.is_object()) bad_field("Commits", "expected objects");
      e.commits.push_back({str(c, "project", true), str(c, "commit_id", true)});
    }
  }
  return e;
}

Json to_json(const Hunk& h) {
  Json j;
  j["Before-Start"] = h.before_start;
  j["Before-Length"] = h.before_len;
  j["After-Start"] = h.after_start;
  j["After-Length"] = h.after_len;
  Json lines = Json::array();
  for (const auto& l : h.lines) lines.push_back(line_change_json(l));
  j["Lines"] = std::move(lines);
  return j;
}

Hunk hunk_from_json(const Json& j) {
  Hunk h;
  h.before_start = static_cast<int>(integer(j, "Before-Start"));
  h.before_len = static_cast<int>(integer(j, "Before-Length"));
  h.after_start = static_cast<int>(integer(j, "After-Start"));
  h.after_len = static_cast<int>(integer(j, "After-Length"));
  for (const auto& l : require(j, "Lines")) h.lines.push_back(line_change_from_json(l));
  return h;
}

Json to_json(const ChangedFile& f) {
  Json j;
  j["File-Name"] = f.file_name;
  j["File-Language"] = std::string(to_string(f.file_language));
  j["Code-Before"] = f.code_before;
  j["Code-After"] = f.code_after;
  Json hunks = Json::array();
  for (const auto& h : f.code_change) hunks.push_back(to_json(h));
  j["Code-Change"] = std::move(hunks);
  j["Html-URL"] = f.html_url;
  j["LLMs-Evaluate"] = std::string(to_string(f.llm_verdict));
  j["Static-Check"] = std::string(to_string(f.static_verdict));
  j["Joint-Decision"] = f.joint ? Json(std::string(to_string(*f.joint))) : Json(nullptr);
  j["Target"] = to_int(f.target);
  return j;
}

ChangedFile file_from_json(const Json& j) {
  ChangedFile f;
  f.file_name = str(j, "File-Name", true);
  f.file_language = language(j, "File-Language");
  f.code_before = str(j, "Code-Before");
  f.code_after = str(j, "Code-After");
  for (const auto& h : require(j, "Code-Change")) f.code_change.push_back(hunk_from_json(h));
  f.html_url = str(j, "Html-URL");
  f.llm_verdict = enum_field(j, "LLMs-Evaluate", parse_llm_verdict);
  f.static_verdict = enum_field(j, "Static-Check", parse_static_verdict);
  if (const auto joint = opt_str(j, "Joint-Decision")) {
    const auto v = parse_joint_verdict(*joint);
    if (!v) bad_field("Joint-Decision", "unexpected value '" + *joint + "'");
    f.joint = *v;
  }
  f.target = label(j, "Target");
  return f;
}

void write_patch_fields(Json& j, const Patch& p) {
  j["Commit-ID"] = p.commit_id;
  j["Commit-Message"] = p.commit_message;
  j["Commit-Date"] = format_timestamp(p.commit_date);
  j["Project"] = p.project;
  j["Parent Patch"] = p.parent_patch ? Json(*p.parent_patch) : Json(nullptr);
  j["Child Patch"] = p.child_patch ? Json(*p.child_patch) : Json(nullptr);
  j["URL"] = p.url;
  j["Html-URL"] = p.html_url;
  j["Outdated"] = p.outdated;
}

Patch patch_fields_from_json(const Json& j) {
  Patch p;
  p.commit_id = str(j, "Commit-ID", true);
  p.commit_message = str(j, "Commit-Message");
  p.commit_date = parse_timestamp(str(j, "Commit-Date", true));
  p.project = str(j, "Project", true);
  p.parent_patch = opt_str(j, "Parent Patch");
  p.child_patch = opt_str(j, "Child Patch");
  p.url = str(j, "URL");
  p.html_url = str(j, "Html-URL");
  p.outdated = boolean(j, "Outdated", false);
  return p;
}

Json to_json(const Patch& p) {
  Json j;
  write_patch_fields(j, p);
  Json files = Json::array();
  for (const auto& f : p.files) files.push_back(to_json(f));
  j["Files"] = std::move(files);
  return j;
}

Patch patch_from_json(const Json& j) {
  Patch p = patch_fields_from_json(j);
  for (const auto& f : require(j, "Files")) p.files.push_back(file_from_json(f));
  return p;
}

Json to_json(const FunctionRecord& r) {
  Json j;
  j["File-Name"] = r.file;
  j["Function-Name"] = r.name;
  j["Start-Line"] = r.span.start;
  j["End-Line"] = r.span.end;
  j["Function"] = r.content;
  j["Changed"] = r.changed;
  j["Version"] = std::string(to_string(r.version));
  j["Target"] = to_int(r.target);
  return j;
}

FunctionRecord function_from_json(const Json& j) {
  FunctionRecord r;
  r.file = str(j, "File-Name", true);
  r.name = str(j, "Function-Name", true);
  r.span = {static_cast<int>(integer(j, "Start-Line")), static_cast<int>(integer(j, "End-Line"))};
  r.content = str(j, "Function");
  r.changed = boolean(j, "Changed", false);
  r.version = enum_field(j, "Version", parse_version);
  r.target = label(j, "Target");
  return r;
}

Json to_json(const LineRecord& r) {
  Json j;
  j["File-Name"] = r.file;
  const Json change = line_change_json(r.change);
  for (auto it = change.begin(); it != change.end(); ++it) j[it.key()] = it.value();
  return j;
}

LineRecord line_from_json(const Json& j) { return {str(j, "File-Name", true), line_change_from_json(j)}; }

Json to_json(const CallTree& t) {
  Json j;
  j["Direction"] = std::string(to_string(t.direction));
  j["Root-File"] = t.root_snippet.file;
  j["Root-Lines"] = Json::array({t.root_snippet.lines.start, t.root_snippet.lines.end});
  j["Root-APIs"] = t.root_apis;
  j["Depth-Limit"] = t.depth_limit;
  Json nodes = Json::array();
  std::map<FunctionRef, std::size_t> index;
  for (const auto& n : t.nodes) {
    index.emplace(n.ref, nodes.size());
    Json node = function_ref_json(n.ref);
    node["Depth"] = n.depth;
    nodes.push_back(std::move(node));
  }
  j["Nodes"] = std::move(nodes);
  Json edges = Json::array();
  for (const auto& [from, to] : t.edges) edges.push_back(Json::array({index.at(from), index.at(to)}));
  j["Edges"] = std::move(edges);
  return j;
}

CallTree tree_from_json(const Json& j) {
  CallTree t;
  t.direction = enum_field(j, "Direction", parse_direction);
  t.root_snippet.file = str(j, "Root-File", true);
  const auto& lines = require(j, "Root-Lines");
  if (!lines.is_array() || lines.size() != 2) bad_field("Root-Lines", "expected [start, end]");
  t.root_snippet.lines = {lines[0].get<int>(), lines[1].get<int>()};
  for (const auto& api : require(j, "Root-APIs")) t.root_apis.push_back(api.get<std::string>());
  t.depth_limit = static_cast<int>(integer(j, "Depth-Limit"));
  for (const auto& n : require(j, "Nodes"))
    t.nodes.push_back({function_ref_from_json(n), static_cast<int>(integer(n, "Depth"))});
  for (const auto& e : require(j, "Edges")) {
    if (!e.is_array() || e.size() != 2) bad_field("Edges", "expected [from, to]");
    const auto from = e[0].get<std::size_t>(), to = e[1].get<std::size_t>();
    if (from >= t.nodes.size() || to >= t.nodes.size()) bad_field("Edges", "node index out of range");
    t.edges.emplace_back(t.nodes[from].ref, t.nodes[to].ref);
  }
  return t;
}

Json to_json(const RepositoryContext& ctx) {
  Json j = to_json(ctx.tree);
  j["Inter-procedural Code"] = ctx.code;
  j["Target"] = to_int(ctx.target);
  return j;
}

RepositoryContext context_from_json(const Json& j) {
  return {tree_from_json(j), str(j, "Inter-procedural Code"), label(j, "Target")};
}

Json to_json(const Finding& f) {
  return Json{{"tool", f.tool}, {"file", f.file},       {"line", f.line},
              {"rule_id", f.rule_id}, {"severity", f.severity}, {"message", f.message}};
}

Finding finding_from_json(const Json& j) {
  return {str(j, "tool"), str(j, "file"), static_cast<int>(integer(j, "line")),
          str(j, "rule_id"), str(j, "severity"), str(j, "message")};
}

Json to_json(const DatasetRecord& r) {
  Json j = to_json(r.entry);
  write_patch_fields(j, r.patch);
  Json repo = Json::array();
  for (const auto& ctx : r.repository_level) repo.push_back(to_json(ctx));
  j["Repository"] = std::move(repo);
  Json files = Json::array();
  for (const auto& f : r.file_level) files.push_back(to_json(f));
  j["Files"] = std::move(files);
  Json functions = Json::array();
  for (const auto& f : r.function_level) functions.push_back(to_json(f));
  j["Functions"] = std::move(functions);
  Json lines = Json::array();
  for (const auto& l : r.line_level) lines.push_back(to_json(l));
  j["Lines"] = std::move(lines);
  return j;
}

DatasetRecord record_from_json(const Json& j) {
  DatasetRecord r;
  r.entry = entry_from_json(j);
  r.patch = patch_fields_from_json(j);
  for (const auto& c : require(j, "Repository")) r.repository_level.push_back(context_from_json(c));
  for (const auto& f : require(j, "Files")) r.file_level.push_back(file_from_json(f));
  r.patch.files = r.file_level;
  for (const auto& f : require(j, "Functions")) r.function_level.push_back(function_from_json(f));
  for (const auto& l : require(j, "Lines")) r.line_level.push_back(line_from_json(l));
  return r;
}

}  // namespace codec

namespace {

codec::Json parse_line(std::string_view line) {
  try {
    return codec::Json::parse(line.begin(), line.end());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::MalformedEntry, std::string("invalid JSON: ") + e.what());
  }
}

template <typename Fn>
auto guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::MalformedEntry, e.what());
  }
}

}  // namespace

VulnEntry parse_entry_line(std::string_view line) {
  const auto j = parse_line(line);
  return validate_entry(guarded([&] { return codec::entry_from_json(j); }));
}

std::string entry_to_line(const VulnEntry& entry) { return codec::to_json(entry).dump(); }

std::string patch_to_line(const Patch& patch) { return codec::to_json(patch).dump(); }

Patch patch_from_line(std::string_view line) {
  const auto j = parse_line(line);
  return guarded([&] { return codec::patch_from_json(j); });
}

std::string record_to_line(const DatasetRecord& record) { return codec::to_json(record).dump(); }

DatasetRecord record_from_line(std::string_view line) {
  const auto j = parse_line(line);
  return guarded([&] { return codec::record_from_json(j); });
}

void sort_records(std::vector<DatasetRecord>& records) {
  std::stable_sort(records.begin(), records.end(), [](const DatasetRecord& a, const DatasetRecord& b) {
    return std::tie(a.entry.publish_date, a.entry.cve_id, a.patch.commit_id) <
           std::tie(b.entry.publish_date, b.entry.cve_id, b.patch.commit_id);
  });
}

void export_dataset(std::vector<DatasetRecord> records, const std::filesystem::path& path) {
  sort_records(records);
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::IoError, "cannot write " + path.string());
  for (const auto& r : records) out << record_to_line(r) << '\n';
  out.flush();
  if (!out) throw Error(ErrorKind::IoError, "write failed for " + path.string());
}

std::vector<DatasetRecord> import_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot read " + path.string());
  std::vector<DatasetRecord> records;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    records.push_back(record_from_line(line));
  }
  return records;
}

}  // namespace vulnforge
