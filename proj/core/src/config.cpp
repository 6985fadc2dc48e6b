#include "vulnforge/config.hpp"

#include <fstream>
#include <sstream>

#include "toml.hpp"
#include "vulnforge/analyzers.hpp"
#include "vulnforge/error.hpp"
#include "vulnforge/llm.hpp"

namespace vulnforge {

namespace {

[[noreturn]] void bad(const std::string& what) { throw Error(ErrorKind::ConfigError, what); }

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() ? path : (base / path).lexically_normal();
}

template <typename T>
std::optional<T> get(const toml::table& t, std::string_view section, std::string_view key) {
  const auto node = t[section][key];
  if (!node) return std::nullopt;
  if (auto v = node.value<T>()) return v;
  bad(std::string(section) + "." + std::string(key) + " has the wrong type");
}

std::vector<std::string> strings(const toml::table& t, std::string_view section, std::string_view key) {
  std::vector<std::string> out;
  const auto node = t[section][key];
  if (!node) return out;
  const auto* arr = node.as_array();
  if (!arr) bad(std::string(section) + "." + std::string(key) + " must be an array of strings");
  for (const auto& el : *arr) {
    const auto s = el.value<std::string>();
    if (!s) bad(std::string(section) + "." + std::string(key) + " must be an array of strings");
    out.push_back(*s);
  }
  return out;
}

std::size_t positive(std::int64_t v, const char* what) {
  if (v < 1) bad(std::string(what) + " must be positive");
  return static_cast<std::size_t>(v);
}

}  // namespace

Config parse_config(std::string_view toml_text, const std::filesystem::path& base_dir) {
  toml::table t;
  try {
    t = toml::parse(toml_text);
  } catch (const toml::parse_error& e) {
    std::ostringstream msg;
    msg << "TOML line " << e.source().begin.line << ": " << e.description();
    bad(msg.str());
  }

  Config c;
  const auto entries = get<std::string>(t, "source", "entries");
  const auto repos = get<std::string>(t, "source", "repos");
  if (!entries) bad("source.entries is required");
  if (!repos) bad("source.repos is required");
  c.source.entries_path = resolve(base_dir, *entries);
  c.source.repos_root = resolve(base_dir, *repos);
  if (const auto y = get<std::int64_t>(t, "source", "since_year")) c.source.since_year = static_cast<int>(*y);
  if (t["source"]["languages"]) {
    std::set<Language> langs;
    for (const auto& name : strings(t, "source", "languages")) {
      const auto lang = parse_language(name);
      if (!lang || !is_supported(*lang)) bad("unsupported language '" + name + "'");
      langs.insert(*lang);
    }
    c.source.language_filter = std::move(langs);
  }

  if (const auto m = get<std::string>(t, "llm", "mode")) c.llm.mode = *m;
  if (c.llm.mode != "mock" && c.llm.mode != "http" && c.llm.mode != "replay")
    bad("llm.mode must be mock, http or replay");
  if (const auto v = get<std::string>(t, "llm", "base_url")) c.llm.base_url = *v;
  if (const auto v = get<std::string>(t, "llm", "model")) c.llm.model = *v;
  if (const auto v = get<std::string>(t, "llm", "transcript")) c.llm.transcript = resolve(base_dir, *v);
  if (const auto v = get<std::string>(t, "llm", "record")) c.llm.record = resolve(base_dir, *v);
  if (const auto v = get<std::int64_t>(t, "llm", "max_function_tokens"))
    c.llm.max_function_tokens = positive(*v, "llm.max_function_tokens");
  if (const auto v = get<double>(t, "llm", "requests_per_minute")) c.llm.requests_per_minute = *v;

  if (const auto m = get<std::string>(t, "analyzers", "mode")) c.analyzers.mode = *m;
  if (c.analyzers.mode != "mock" && c.analyzers.mode != "tools") bad("analyzers.mode must be mock or tools");
  c.analyzers.dangerous = t["analyzers"]["dangerous"] ? strings(t, "analyzers", "dangerous")
                                                       : default_dangerous_functions();
  for (const auto& [tool, key] : {std::pair{kCppcheck, "cppcheck"}, std::pair{kFlawfinder, "flawfinder"},
                                  std::pair{kRats, "rats"}, std::pair{kSemgrep, "semgrep"}}) {
    c.analyzers.binaries[std::string(tool)] = get<std::string>(t, "analyzers", key).value_or(key);
  }
  if (const auto v = get<std::string>(t, "analyzers", "semgrep_config")) c.analyzers.semgrep_config = *v;
  if (const auto v = get<std::int64_t>(t, "analyzers", "match_slack")) {
    if (*v < 0) bad("analyzers.match_slack must not be negative");
    c.analyzers.match_slack = static_cast<int>(*v);
  }

  if (const auto v = get<std::string>(t, "callgraph", "backend")) c.callgraph.backend = *v;
  if (c.callgraph.backend != "builtin")
    bad("callgraph.backend '" + c.callgraph.backend + "' is not available; only builtin is implemented");
  if (const auto v = get<std::int64_t>(t, "callgraph", "depth_limit"))
    c.callgraph.depth_limit = static_cast<int>(positive(*v, "callgraph.depth_limit"));

  if (t["filter"]["suffixes"]) {
    c.filter.suffixes = strings(t, "filter", "suffixes");
    if (c.filter.suffixes.empty()) bad("filter.suffixes must not be empty");
  }
  if (const auto v = get<std::int64_t>(t, "filter", "window_days"))
    c.filter.window_days = static_cast<int>(positive(*v, "filter.window_days"));

  if (const auto v = get<std::string>(t, "export", "out")) c.out = resolve(base_dir, *v);

  for (const auto& [key, slot] :
       {std::pair{"ingest", &c.workers.ingest}, std::pair{"untangle", &c.workers.untangle},
        std::pair{"extract", &c.workers.extract}, std::pair{"filter", &c.workers.filter},
        std::pair{"label", &c.workers.label}}) {
    if (const auto v = get<std::int64_t>(t, "workers", key)) *slot = positive(*v, key);
  }
  return c;
}

Config load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) bad("cannot read config " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str(), path.parent_path().empty() ? std::filesystem::path(".") : path.parent_path());
}

std::string Config::fingerprint(std::string_view stage) const {
  std::ostringstream s;
  s << "v1|ingest";
  if (stage == "ingest") return prompt_hash(s.str());
  s << "|untangle|" << llm.mode << '|' << llm.model << '|' << llm.base_url << '|' << llm.max_function_tokens << '|'
    << analyzers.mode << '|' << analyzers.semgrep_config << '|' << analyzers.match_slack;
  for (const auto& d : analyzers.dangerous) s << "|d:" << d;
  for (const auto& [k, v] : analyzers.binaries) s << "|b:" << k << '=' << v;
  if (stage == "untangle") return prompt_hash(s.str());
  s << "|extract|" << callgraph.backend << '|' << callgraph.depth_limit;
  if (stage == "extract") return prompt_hash(s.str());
  s << "|filter|" << filter.window_days.value_or(-1);
  for (const auto& x : filter.suffixes) s << "|s:" << x;
  if (stage == "filter") return prompt_hash(s.str());
  s << "|label";
  return prompt_hash(s.str());
}

}  // namespace vulnforge
