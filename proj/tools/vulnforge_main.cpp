#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "vulnforge/config.hpp"
#include "vulnforge/error.hpp"
#include "vulnforge/pipeline.hpp"
#include "vulnforge/serialize.hpp"
#include "vulnforge/stats.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 1;
constexpr int kPartial = 2;
constexpr int kFatal = 3;

struct Options {
  std::string config;
  std::string out;
  std::string replay;
  std::string record;
  std::string languages;
  int since_year = 0;
  bool no_cache = false;
  std::string input;  // stats
  bool json = false;  // stats
};

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream s(text);
  std::string item;
  while (std::getline(s, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

vulnforge::Config effective_config(const Options& o) {
  using namespace vulnforge;
  Config c = load_config(o.config);
  if (!o.out.empty()) c.out = o.out;
  if (!o.replay.empty()) {
    c.llm.mode = "replay";
    c.llm.transcript = o.replay;
  }
  if (!o.record.empty()) c.llm.record = o.record;
  if (!o.languages.empty()) {
    std::set<Language> langs;
    for (const auto& name : split_list(o.languages)) {
      const auto lang = parse_language(name);
      if (!lang || !is_supported(*lang)) throw Error(ErrorKind::ConfigError, "unsupported language '" + name + "'");
      langs.insert(*lang);
    }
    c.source.language_filter = std::move(langs);
  }
  if (o.since_year > 0) c.source.since_year = o.since_year;
  return c;
}

std::filesystem::path cache_root(const Options& o) {
  if (o.no_cache) return {};
  if (const char* env = std::getenv("VULNFORGE_CACHE_DIR"); env && *env) return env;
  const auto dir = std::filesystem::path(o.config).parent_path();
  return (dir.empty() ? std::filesystem::path(".") : dir) / ".vulnforge-cache";
}

int run_stage(const Options& o, vulnforge::Stage stage) {
  using namespace vulnforge;
  const Config config = effective_config(o);
  LocalGitSource source(config.source.repos_root);
  std::string tag;
  const auto llm = make_llm_client(config.llm, tag);
  const AnalyzerRegistry analyzers = make_analyzer_registry(config.analyzers);

  PipelineServices services;
  services.source = &source;
  services.llm = llm.get();
  services.analyzers = &analyzers;
  services.cache = StageCache(cache_root(o));
  services.llm_tag = tag;

  const PipelineResult result = run_pipeline(config, services, stage);
  write_stage_output(result, stage, config.out);

  auto report_path = config.out;
  report_path += ".report.json";
  std::ofstream(report_path) << result.report.to_json() << '\n';

  std::cerr << to_string(stage) << ": " << result.report.entries << " entries";
  for (const auto& [name, st] : result.report.stages)
    std::cerr << ", " << name << " " << st.processed << " (" << st.cache_hits << " cached, " << st.failed
              << " failed)";
  std::cerr << ", " << result.report.issues.size() << " issues -> " << config.out.string() << '\n';
  return result.report.partial() ? kPartial : kOk;
}

int run_stats(const Options& o) {
  using namespace vulnforge;
  std::filesystem::path input = o.input;
  if (input.empty()) {
    if (o.config.empty()) throw Error(ErrorKind::ConfigError, "stats needs --in or --config");
    input = load_config(o.config).out;
  }
  const OutdatedReport report = outdated_breakdown(import_dataset(input));
  if (!o.out.empty()) {
    std::ofstream out(o.out);
    out << report_to_json(report) << '\n';
    if (!out) throw Error(ErrorKind::IoError, "cannot write " + o.out);
  }
  std::cout << (o.json ? report_to_json(report) + "\n" : report_to_table(report));
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Builds multi-granularity vulnerability datasets from CVE entries and git histories."};
  app.require_subcommand(1);
  Options o;

  struct StageCommand {
    const char* name;
    vulnforge::Stage stage;
    const char* help;
  };
  const StageCommand stages[] = {
      {"ingest", vulnforge::Stage::Ingest, "Load entries and materialize patches"},
      {"untangle", vulnforge::Stage::Untangle, "Add LLM, static and joint verdicts per file"},
      {"extract", vulnforge::Stage::Extract, "Add caller and callee trees for related files"},
      {"filter", vulnforge::Stage::Filter, "Resolve child patches and flag outdated ones"},
      {"label", vulnforge::Stage::Label, "Assemble labeled dataset records"},
      {"run", vulnforge::Stage::Label, "Run every stage and export the dataset"},
  };
  std::vector<std::pair<CLI::App*, vulnforge::Stage>> commands;
  for (const auto& s : stages) {
    CLI::App* sub = app.add_subcommand(s.name, s.help);
    sub->add_option("--config", o.config, "TOML configuration file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", o.out, "Output path (overrides export.out)");
    sub->add_option("--replay", o.replay, "Answer LLM prompts from this transcript");
    sub->add_option("--record", o.record, "Append LLM exchanges to this transcript");
    sub->add_option("--languages", o.languages, "Comma-separated subset of c,cpp,java,python");
    sub->add_option("--since-year", o.since_year, "Drop entries published before this year");
    sub->add_flag("--no-cache", o.no_cache, "Do not read or write the stage cache");
    commands.emplace_back(sub, s.stage);
  }
  CLI::App* stats = app.add_subcommand("stats", "Outdated-patch breakdown of a dataset");
  stats->add_option("--config", o.config, "Configuration whose export.out is the input");
  stats->add_option("--in", o.input, "Dataset JSONL file")->check(CLI::ExistingFile);
  stats->add_option("--out", o.out, "Also write the JSON report here");
  stats->add_flag("--json", o.json, "Print JSON instead of a table");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (stats->parsed()) return run_stats(o);
    for (const auto& [sub, stage] : commands)
      if (sub->parsed()) return run_stage(o, stage);
  } catch (const vulnforge::Error& e) {
    std::cerr << "vulnforge: " << e.what() << '\n';
    return e.kind() == vulnforge::ErrorKind::ConfigError ? kConfigError : kFatal;
  } catch (const std::exception& e) {
    std::cerr << "vulnforge: " << e.what() << '\n';
    return kFatal;
  }
  return kFatal;
}
