#include "vulnforge/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>

#include "json_codec.hpp"
#include "vulnforge/depgraph.hpp"
#include "vulnforge/error.hpp"
#include "vulnforge/http_client.hpp"
#include "vulnforge/labeling.hpp"
#include "vulnforge/serialize.hpp"
#include "vulnforge/tracefilter.hpp"
#include "vulnforge/untangle.hpp"
#include "vulnforge/worker_pool.hpp"

namespace vulnforge {

using codec::Json;

std::string_view to_string(Stage stage) {
  switch (stage) {
    case Stage::Ingest: return "ingest";
    case Stage::Untangle: return "untangle";
    case Stage::Extract: return "extract";
    case Stage::Filter: return "filter";
    case Stage::Label: return "label";
  }
  return "?";
}

std::optional<Stage> parse_stage(std::string_view text) {
  for (Stage s : {Stage::Ingest, Stage::Untangle, Stage::Extract, Stage::Filter, Stage::Label})
    if (to_string(s) == text) return s;
  return std::nullopt;
}

std::string RunReport::to_json() const {
  Json j;
  j["entries"] = entries;
  j["entry_errors"] = Json::array();
  for (const auto& e : entry_errors) j["entry_errors"].push_back({{"line", e.line}, {"message", e.message}});
  j["stages"] = Json::object();
  for (Stage s : {Stage::Ingest, Stage::Untangle, Stage::Extract, Stage::Filter, Stage::Label}) {
    const auto it = stages.find(std::string(to_string(s)));
    if (it == stages.end()) continue;
    j["stages"][it->first] = {
        {"processed", it->second.processed}, {"cache_hits", it->second.cache_hits}, {"failed", it->second.failed}};
  }
  j["issues"] = Json::array();
  for (const auto& i : issues)
    j["issues"].push_back({{"stage", i.stage},
                           {"cve_id", i.cve_id},
                           {"project", i.project},
                           {"commit_id", i.commit_id},
                           {"kind", i.kind},
                           {"message", i.message},
                           {"skipped", i.skipped}});
  j["parse_failures"] = Json::array();
  for (const auto& p : parse_failures) j["parse_failures"].push_back({{"file", p.file}, {"message", p.message}});
  j["records"] = records;
  return j.dump(2);
}

namespace {

std::string commit_key(const WorkItem& item) { return item.patch.project + "@" + item.patch.commit_id; }
std::string entry_key(const WorkItem& item) { return item.entry.cve_id + "|" + commit_key(item); }

RunIssue issue(Stage stage, const WorkItem& item, const std::string& commit, const Error& e, bool skipped) {
  return {std::string(to_string(stage)), item.entry.cve_id, item.patch.project, commit,
          std::string(to_string(e.kind())), e.what(), skipped};
}

// Collects per-item outcomes from worker threads.
struct StageLog {
  std::mutex mutex;
  StageStats stats;
  std::vector<std::pair<std::size_t, RunIssue>> issues;  // keyed by item index for stable order

  void hit() {
    std::lock_guard lock(mutex);
    ++stats.processed;
    ++stats.cache_hits;
  }
  void done() {
    std::lock_guard lock(mutex);
    ++stats.processed;
  }
  void fail(std::size_t i, RunIssue issue) {
    std::lock_guard lock(mutex);
    ++stats.processed;
    ++stats.failed;
    issues.emplace_back(i, std::move(issue));
  }
  void note(std::size_t i, RunIssue issue) {
    std::lock_guard lock(mutex);
    issues.emplace_back(i, std::move(issue));
  }
  void flush(Stage stage, RunReport& report) {
    std::stable_sort(issues.begin(), issues.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    for (auto& [i, is] : issues) report.issues.push_back(std::move(is));
    report.stages[std::string(to_string(stage))] = stats;
  }
};

// Drops items whose slot is marked failed.
void compact(std::vector<WorkItem>& items, const std::vector<char>& failed) {
  std::vector<WorkItem> kept;
  kept.reserve(items.size());
  for (std::size_t i = 0; i < items.size(); ++i)
    if (!failed[i]) kept.push_back(std::move(items[i]));
  items = std::move(kept);
}

class Runner {
 public:
  Runner(const Config& config, PipelineServices& services) : config_(config), services_(services) {}

  PipelineResult run(Stage last) {
    PipelineResult result;
    load(result);
    auto& items = result.items;
    auto& report = result.report;
    ingest(items, report);
    if (last == Stage::Ingest) return result;
    untangle(items, report);
    if (last == Stage::Untangle) return result;
    extract(items, report);
    if (last == Stage::Extract) return result;
    filter(items, report);
    if (last == Stage::Filter) return result;
    label(result);
    return result;
  }

 private:
  std::string fp(Stage stage) const {
    std::string f = config_.fingerprint(to_string(stage));
    if (stage != Stage::Ingest) f += "|" + services_.llm_tag;
    return f;
  }

  void load(PipelineResult& result) {
    EntryLoadResult loaded = load_entries(config_.source);
    result.report.entries = loaded.entries.size();
    result.report.entry_errors = std::move(loaded.errors);
    for (auto& entry : loaded.entries) {
      for (const auto& ref : entry.commits) {
        WorkItem item;
        item.entry = entry;
        item.patch.project = ref.project;
        item.patch.commit_id = ref.commit_id;
        result.items.push_back(std::move(item));
      }
    }
  }

  void ingest(std::vector<WorkItem>& items, RunReport& report) {
    StageLog log;
    std::vector<char> failed(items.size(), 0);
    const std::string f = fp(Stage::Ingest);
    parallel_for(items.size(), config_.workers.ingest, [&](std::size_t i) {
      WorkItem& item = items[i];
      const std::string key = commit_key(item);
      if (auto cached = services_.cache.get(key, "ingest", f)) {
        item.patch = patch_from_line(*cached);
        log.hit();
        return;
      }
      try {
        item.patch = services_.source->load_patch(item.patch.project, item.patch.commit_id);
      } catch (const Error& e) {
        failed[i] = 1;
        log.fail(i, issue(Stage::Ingest, item, item.patch.commit_id, e, true));
        return;
      }
      services_.cache.put(key, "ingest", f, patch_to_line(item.patch));
      log.done();
    });
    log.flush(Stage::Ingest, report);
    compact(items, failed);
  }

  void untangle(std::vector<WorkItem>& items, RunReport& report) {
    StageLog log;
    const std::string f = fp(Stage::Untangle);
    UntangleOptions options;
    options.prompt.max_function_tokens = config_.llm.max_function_tokens;
    options.match_slack = config_.analyzers.match_slack;

    // Cache lookups first, then every remaining file is one task.
    std::vector<std::pair<std::size_t, std::size_t>> tasks;
    std::vector<char> cached(items.size(), 0);
    for (std::size_t i = 0; i < items.size(); ++i) {
      auto& item = items[i];
      if (auto hit = services_.cache.get(entry_key(item), "untangle", f)) {
        const Json j = Json::parse(*hit);
        const auto& files = j.at("Files");
        for (std::size_t k = 0; k < item.patch.files.size() && k < files.size(); ++k) {
          auto& file = item.patch.files[k];
          file.llm_verdict = *parse_llm_verdict(files[k].at("LLMs-Evaluate").get<std::string>());
          file.static_verdict = *parse_static_verdict(files[k].at("Static-Check").get<std::string>());
          file.joint = *parse_joint_verdict(files[k].at("Joint-Decision").get<std::string>());
          file.target = *file.joint == JointVerdict::Related ? Label::Vulnerable : Label::NonVulnerable;
        }
        for (const auto& n : j.at("Notes"))
          log.note(i, {"untangle", item.entry.cve_id, item.patch.project, item.patch.commit_id,
                       n.at(0).get<std::string>(), n.at(1).get<std::string>(), false});
        item.untangled = true;
        cached[i] = 1;
        log.hit();
        continue;
      }
      for (std::size_t k = 0; k < item.patch.files.size(); ++k) tasks.emplace_back(i, k);
    }

    std::vector<FileVerdict> verdicts(tasks.size());
    parallel_for(tasks.size(), config_.workers.untangle, [&](std::size_t t) {
      const auto [i, k] = tasks[t];
      const WorkItem& item = items[i];
      verdicts[t] = untangle_file(item.entry, item.patch, item.patch.files[k], *services_.llm, services_.matrix,
                                  *services_.analyzers, options);
    });

    std::map<std::size_t, Json> notes;
    for (std::size_t t = 0; t < tasks.size(); ++t) {
      const auto [i, k] = tasks[t];
      auto& file = items[i].patch.files[k];
      apply_verdict(file, verdicts[t]);
      auto& n = notes.try_emplace(i, Json::array()).first->second;
      for (const auto& note : verdicts[t].notes) n.push_back(Json::array({file.file_name, note}));
    }
    for (std::size_t i = 0; i < items.size(); ++i) {
      if (cached[i]) continue;
      auto& item = items[i];
      Json j;
      j["Files"] = Json::array();
      for (const auto& file : item.patch.files)
        j["Files"].push_back({{"File-Name", file.file_name},
                              {"LLMs-Evaluate", to_string(file.llm_verdict)},
                              {"Static-Check", to_string(file.static_verdict)},
                              {"Joint-Decision", to_string(*file.joint)}});
      j["Notes"] = notes.count(i) ? notes[i] : Json::array();
      for (const auto& n : j["Notes"])
        log.note(i, {"untangle", item.entry.cve_id, item.patch.project, item.patch.commit_id,
                     n.at(0).get<std::string>(), n.at(1).get<std::string>(), false});
      services_.cache.put(entry_key(item), "untangle", f, j.dump());
      item.untangled = true;
      log.done();
    }
    log.flush(Stage::Untangle, report);
  }

  void extract(std::vector<WorkItem>& items, RunReport& report) {
    StageLog log;
    std::vector<char> failed(items.size(), 0);
    std::mutex parse_mutex;
    const std::string f = fp(Stage::Extract);
    const int depth = config_.callgraph.depth_limit;
    parallel_for(items.size(), config_.workers.extract, [&](std::size_t i) {
      WorkItem& item = items[i];
      if (auto hit = services_.cache.get(entry_key(item), "extract", f)) {
        for (const auto& c : Json::parse(*hit)) item.repository.push_back(codec::context_from_json(c));
        log.hit();
        return;
      }
      try {
        item.repository = extract_item(item, depth, parse_mutex, report);
      } catch (const Error& e) {
        failed[i] = 1;
        log.fail(i, issue(Stage::Extract, item, item.patch.commit_id, e, true));
        return;
      }
      Json arr = Json::array();
      for (const auto& c : item.repository) arr.push_back(codec::to_json(c));
      services_.cache.put(entry_key(item), "extract", f, arr.dump());
      log.done();
    });
    log.flush(Stage::Extract, report);
    compact(items, failed);
  }

  std::vector<RepositoryContext> extract_item(const WorkItem& item, int depth, std::mutex& parse_mutex,
                                              RunReport& report) {
    std::vector<RepositoryContext> out;
    // Related files grouped by language family; one snapshot per family.
    std::map<Language, std::vector<const ChangedFile*>> families;
    for (const auto& file : item.patch.files) {
      if (file.joint != JointVerdict::Related || !is_supported(file.file_language)) continue;
      const Language family = file.file_language == Language::Cpp ? Language::C : file.file_language;
      families[family].push_back(&file);
    }
    for (const auto& [family, files] : families) {
      RepoSnapshot snapshot;
      if (item.patch.parent_patch)
        snapshot = services_.source->snapshot(item.patch.project, *item.patch.parent_patch, family);
      const SyntaxIndex index = build_syntax_index(snapshot, family);
      if (!index.errors().empty()) {
        std::lock_guard lock(parse_mutex);
        report.parse_failures.insert(report.parse_failures.end(), index.errors().begin(), index.errors().end());
      }
      for (const ChangedFile* file : files) {
        const FileVersions versions = index_versions(*file);
        const FileIndex* before = index.file(file->file_name);
        RelatedFile related{file->file_name, make_snippets(*file, before ? *before : versions.before, &versions.after)};
        const Dependencies deps = extract_dependencies({related}, index, depth);
        for (std::size_t s = 0; s < deps.callers.size(); ++s) {
          for (const CallTree* tree : {&deps.callers[s], &deps.callees[s]})
            out.push_back({*tree, inter_procedural_code(*tree, index), file->target});
        }
      }
    }
    return out;
  }

  void filter(std::vector<WorkItem>& items, RunReport& report) {
    StageLog log;
    std::vector<char> failed(items.size(), 0);

    std::vector<Patch> shells;  // paths and dates are all the dictionary needs
    std::set<std::string> ids;
    for (const auto& item : items) {
      if (!ids.insert(commit_key(item)).second) continue;
      Patch p;
      p.project = item.patch.project;
      p.commit_id = item.patch.commit_id;
      p.commit_date = item.patch.commit_date;
      for (const auto& file : item.patch.files) {
        ChangedFile shell;
        shell.file_name = file.file_name;
        p.files.push_back(std::move(shell));
      }
      shells.push_back(std::move(p));
    }
    const PathDictionary dict = build_path_dictionary(shells);
    std::string corpus;
    for (const auto& id : ids) corpus += id + "\n";
    const std::string f = fp(Stage::Filter) + "|" + prompt_hash(corpus);

    const SuffixBlacklist blacklist =
        config_.filter.suffixes.empty() ? SuffixBlacklist() : SuffixBlacklist(config_.filter.suffixes);
    std::mutex history_mutex;
    std::map<std::string, std::shared_ptr<const ProjectHistory>> histories;
    auto history_of = [&](const std::string& project) {
      {
        std::lock_guard lock(history_mutex);
        if (auto it = histories.find(project); it != histories.end()) return it->second;
      }
      auto h = std::make_shared<const ProjectHistory>(services_.source->history(project));
      std::lock_guard lock(history_mutex);
      return histories.try_emplace(project, std::move(h)).first->second;
    };

    parallel_for(items.size(), config_.workers.filter, [&](std::size_t i) {
      WorkItem& item = items[i];
      const std::string key = commit_key(item);
      if (auto hit = services_.cache.get(key, "filter", f)) {
        const Json j = Json::parse(*hit);
        if (!j.at("Child Patch").is_null()) item.patch.child_patch = j.at("Child Patch").get<std::string>();
        item.outdated = j.at("Outdated").get<bool>();
        item.patch.outdated = *item.outdated;
        log.hit();
        return;
      }
      try {
        const TraceOutcome t = trace_patch(item.patch, dict, *history_of(item.patch.project), blacklist,
                                           config_.filter.window_days);
        item.patch.child_patch = t.child_patch;
        item.outdated = t.outdated;
        item.patch.outdated = t.outdated;
      } catch (const Error& e) {
        failed[i] = 1;
        log.fail(i, issue(Stage::Filter, item, item.patch.commit_id, e, true));
        return;
      }
      Json j;
      j["Child Patch"] = item.patch.child_patch ? Json(*item.patch.child_patch) : Json(nullptr);
      j["Outdated"] = *item.outdated;
      services_.cache.put(key, "filter", f, j.dump());
      log.done();
    });
    log.flush(Stage::Filter, report);
    compact(items, failed);
  }

  void label(PipelineResult& result) {
    StageLog log;
    auto& items = result.items;
    std::vector<std::optional<DatasetRecord>> records(items.size());
    parallel_for(items.size(), config_.workers.label, [&](std::size_t i) {
      WorkItem& item = items[i];
      try {
        records[i] = assemble_record(item.entry, item.patch, item.patch.files, item.repository, item.outdated);
        log.done();
      } catch (const Error& e) {
        log.fail(i, issue(Stage::Label, item, item.patch.commit_id, e, true));
      }
    });
    for (auto& r : records)
      if (r) result.records.push_back(std::move(*r));
    sort_records(result.records);
    result.report.records = result.records.size();
    log.flush(Stage::Label, result.report);
  }

  const Config& config_;
  PipelineServices& services_;
};

}  // namespace

PipelineResult run_pipeline(const Config& config, PipelineServices& services, Stage last) {
  if (!services.source || !services.llm || !services.analyzers)
    throw Error(ErrorKind::ConfigError, "pipeline services are incomplete");
  return Runner(config, services).run(last);
}

void write_stage_output(const PipelineResult& result, Stage stage, const std::filesystem::path& path) {
  if (stage == Stage::Label) {
    export_dataset(result.records, path);
    return;
  }
  std::vector<const WorkItem*> order;
  for (const auto& item : result.items) order.push_back(&item);
  std::stable_sort(order.begin(), order.end(), [](const WorkItem* a, const WorkItem* b) {
    return std::tie(a->entry.publish_date, a->entry.cve_id, a->patch.commit_id) <
           std::tie(b->entry.publish_date, b->entry.cve_id, b->patch.commit_id);
  });
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::IoError, "cannot write " + path.string());
  for (const WorkItem* item : order) {
    Json j;
    j["CVE-ID"] = item->entry.cve_id;
    const Json patch = codec::to_json(item->patch);
    for (auto it = patch.begin(); it != patch.end(); ++it) j[it.key()] = it.value();
    if (stage >= Stage::Extract) {
      j["Repository"] = Json::array();
      for (const auto& c : item->repository) j["Repository"].push_back(codec::to_json(c));
    }
    if (stage < Stage::Filter) j.erase("Outdated");
    out << j.dump() << '\n';
  }
  if (!out) throw Error(ErrorKind::IoError, "cannot write " + path.string());
}

std::unique_ptr<LlmClient> make_llm_client(const LlmConfig& config, std::string& tag) {
  std::unique_ptr<LlmClient> client;
  if (config.mode == "mock") {
    client = std::make_unique<MockLlmClient>();
    tag = "mock";
  } else if (config.mode == "replay") {
    if (!config.transcript) throw Error(ErrorKind::ConfigError, "llm.mode = replay needs llm.transcript");
    std::ifstream in(*config.transcript, std::ios::binary);
    if (!in) throw Error(ErrorKind::ConfigError, "cannot read transcript " + config.transcript->string());
    std::ostringstream text;
    text << in.rdbuf();
    client = std::make_unique<ReplayClient>(*config.transcript);
    tag = "replay:" + prompt_hash(text.str());
  } else if (config.mode == "http") {
    HttpChatOptions options;
    options.base_url = config.base_url;
    options.model = config.model;
    options.requests_per_minute = config.requests_per_minute;
    client = std::make_unique<HttpChatClient>(options);
    tag = "http:" + config.base_url + "|" + config.model;
  } else {
    throw Error(ErrorKind::ConfigError, "unknown llm.mode '" + config.mode + "'");
  }
  if (config.record) client = std::make_unique<RecordingClient>(std::move(client), *config.record);
  return client;
}

AnalyzerRegistry make_analyzer_registry(const AnalyzerConfig& config) {
  if (config.mode == "mock") return mock_registry(config.dangerous);
  AnalyzerRegistry r;
  const auto bin = [&](std::string_view name) {
    const auto it = config.binaries.find(std::string(name));
    return it == config.binaries.end() ? std::string(name) : it->second;
  };
  r.add(std::make_shared<ToolAnalyzer>(ToolAnalyzer::Kind::Cppcheck, bin(kCppcheck)));
  r.add(std::make_shared<ToolAnalyzer>(ToolAnalyzer::Kind::Flawfinder, bin(kFlawfinder)));
  r.add(std::make_shared<ToolAnalyzer>(ToolAnalyzer::Kind::Rats, bin(kRats)));
  r.add(std::make_shared<ToolAnalyzer>(ToolAnalyzer::Kind::Semgrep, bin(kSemgrep), config.semgrep_config));
  return r;
}

}  // namespace vulnforge
