// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "vulnforge/analyzers.hpp"
#include "vulnforge/depgraph.hpp"
#include "vulnforge/diff.hpp"
#include "vulnforge/error.hpp"
#include "vulnforge/git.hpp"
#include "vulnforge/ingest.hpp"
#include "vulnforge/labeling.hpp"
#include "vulnforge/pipeline.hpp"
#include "vulnforge/stats.hpp"
#include "vulnforge/tracefilter.hpp"
#include "vulnforge/untangle.hpp"

using namespace vulnforge;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool cond, const std::string& what) {
    if (!cond && pass) {
      pass = false;
      detail = what;
    }
  }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// 1 -------------------------------------------------------------------------

Outcome joint_table() {
  Outcome o;
  const auto t0 = Clock::now();
  struct Cell {
    LlmVerdict llm;
    StaticVerdict stat;
    JointVerdict want;
  };
  const Cell table[] = {
      {LlmVerdict::Yes, StaticVerdict::Related, JointVerdict::Related},
      {LlmVerdict::Yes, StaticVerdict::Unrelated, JointVerdict::Excluded},
      {LlmVerdict::Yes, StaticVerdict::NotApplicable, JointVerdict::Excluded},
      {LlmVerdict::No, StaticVerdict::Related, JointVerdict::Excluded},
      {LlmVerdict::No, StaticVerdict::Unrelated, JointVerdict::Unrelated},
      {LlmVerdict::No, StaticVerdict::NotApplicable, JointVerdict::Excluded},
      {LlmVerdict::Unknown, StaticVerdict::Related, JointVerdict::Excluded},
      {LlmVerdict::Unknown, StaticVerdict::Unrelated, JointVerdict::Excluded},
      {LlmVerdict::Unknown, StaticVerdict::NotApplicable, JointVerdict::Excluded},
  };
  int non_excluded = 0;
  for (const auto& c : table) {
    const JointVerdict got = joint_decision(c.llm, c.stat);
    o.require(got == c.want, std::string("cell (") + std::string(to_string(c.llm)) + ", " +
                                 std::string(to_string(c.stat)) + ") -> " + std::string(to_string(got)));
    if (got != JointVerdict::Excluded) ++non_excluded;
  }
  o.require(non_excluded == 2, "non-Excluded cells: " + std::to_string(non_excluded));
  o.require(seconds_since(t0) < 1.0, "slower than 1 s");
  if (o.pass) o.detail = "9 cells, 2 non-Excluded";
  return o;
}

// 2 -------------------------------------------------------------------------

Outcome ttm_replay() {
  Outcome o;
  const auto t0 = Clock::now();
  vftest::TempDir tmp;
  vftest::FixtureRepo repo(tmp.path() / "linux");
  const auto h = vftest::build_ttm_history(repo);

  const GitRepository git(repo.dir());
  const Patch original = load_patch(git, "linux", h.original);
  const Patch follow_up = load_patch(git, "linux", h.follow_up);
  o.require(follow_up.commit_message.find("fix start page for huge page check") != std::string::npos,
            "follow-up message");
  const ProjectHistory history(git.history());
  const PathDictionary dict = build_path_dictionary({original, follow_up});
  const SuffixBlacklist blacklist;

  const TraceOutcome first = trace_patch(original, dict, history, blacklist);
  const TraceOutcome second = trace_patch(follow_up, dict, history, blacklist);
  o.require(first.outdated, "original fix not outdated");
  o.require(first.child_patch == h.follow_up, "original fix child is not the follow-up");
  o.require(!second.outdated, "follow-up flagged outdated");
  o.require(!first.retained.count(vftest::kTtmCompanion) && !second.retained.count(vftest::kTtmCompanion),
            "companion file retained");

  // Only the companion file: shared with both neighbours, yet never decisive.
  Patch companion_only = original;
  std::erase_if(companion_only.files, [](const ChangedFile& f) { return f.file_name != vftest::kTtmCompanion; });
  o.require(companion_only.files.size() == 1, "companion missing from the patch");
  o.require(!trace_patch(companion_only, dict, history, blacklist).outdated, "companion triggered outdated");

  o.require(seconds_since(t0) < 5.0, "slower than 5 s");
  if (o.pass) o.detail = "original outdated, follow-up not, companion inert";
  return o;
}

// 3 -------------------------------------------------------------------------

Outcome suffix_fixture() {
  Outcome o;
  const std::vector<std::string> blocked = {
      "README.md",          "docs/guide.rst",      "package.json",     "assets/logo.svg",
      "drivers/net/ChangeLog.ChangeLog", "fs/ext4/ext4.ChangeLog", "test/expected.out", "docs/api/index.md",
      "config/settings.json", "build/run.out",
  };
  const std::vector<std::string> kept = {
      "src/main.c",         "lib/parser.cc",       "app/Server.java",  "tools/gen.py",
      "src/md.c",           "src/json.cc",         "docs/ChangeLog.py", "out/Output.java",
      "svg/render.c",       "rst/lexer.py",
  };
  std::vector<std::string> paths;
  for (std::size_t i = 0; i < blocked.size(); ++i) {
    paths.push_back(kept[i]);
    paths.push_back(blocked[i]);
  }
  o.require(paths.size() == 20, "fixture size");
  const auto got = suffix_filter(paths, SuffixBlacklist());
  o.require(got == kept, "retained set differs (" + std::to_string(got.size()) + " kept)");
  std::set<std::string> suffixes;
  const SuffixBlacklist defaults;
  for (const auto& s : defaults.suffixes()) suffixes.insert(s);
  o.require(suffixes == std::set<std::string>{".md", ".rst", ".json", ".svg", ".ChangeLog", ".out"},
            "default suffix list");
  if (o.pass) o.detail = "10 dropped, 10 kept of 20";
  return o;
}

// 4 -------------------------------------------------------------------------

Outcome callee_oracle() {
  Outcome o;
  const auto t0 = Clock::now();
  std::mt19937 rng(20240401);
  int agree = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto repo = vftest::random_repo(rng, 50, 5);
    const SyntaxIndex index = build_syntax_index(repo.render(), Language::C);
    o.require(index.errors().empty(), "parse failure in trial " + std::to_string(trial));
    const int depth = std::uniform_int_distribution<int>(1, 6)(rng);
    const int nroots = std::uniform_int_distribution<int>(1, 3)(rng);
    std::vector<std::size_t> roots;
    std::vector<FunctionRef> refs;
    for (int r = 0; r < nroots; ++r) {
      const auto i = std::uniform_int_distribution<std::size_t>(0, repo.functions.size() - 1)(rng);
      roots.push_back(i);
      const auto& fn = repo.functions[i];
      for (const auto& ref : index.functions_named(fn.name))
        if (ref.file == repo.file_name(fn.file)) refs.push_back(ref);
    }
    const CallTree tree = static_tool_extractor(refs, index, Direction::Callee, depth);
    std::set<std::pair<std::string, std::string>> nodes;
    for (const auto& n : tree.nodes) nodes.insert({n.ref.file, n.ref.name});
    if (nodes == vftest::reachable(repo, roots, depth))
      ++agree;
    else
      o.require(false, "trial " + std::to_string(trial) + " node set differs");
  }
  const double elapsed = seconds_since(t0);
  o.require(elapsed < 30.0, "slower than 30 s");
  if (o.pass) {
    std::ostringstream s;
    s << agree << "/100 exact in " << elapsed << " s";
    o.detail = s.str();
  }
  return o;
}

// 5 -------------------------------------------------------------------------

Outcome caller_root() {
  Outcome o;
  const auto fx = vftest::wrapper_fixture();
  ChangedFile file;
  file.file_name = "lib/xmalloc.c";
  file.file_language = Language::C;
  file.code_before = fx.before;
  file.code_after = fx.after;
  file.code_change = extract_hunks(fx.before, fx.after);
  const FileIndex before = parse_source(file.file_name, fx.before, Language::C);
  const FileIndex after = parse_source(file.file_name, fx.after, Language::C);
  SyntaxIndex index;
  index.add(before, fx.before);

  const auto snippets = make_snippets(file, before, &after);
  o.require(!snippets.empty(), "no snippet");
  bool found = false;
  for (const auto& s : snippets) {
    o.require(std::find(s.lines.begin(), s.lines.end(), fx.call_line) == s.lines.end(),
              "snippet covers the call site");
    const auto near = get_near_func(s, index);
    if (std::find(near.begin(), near.end(), "xmalloc") != near.end()) found = true;
  }
  o.require(found, "xmalloc missing from get_near_func");
  if (o.pass) o.detail = "xmalloc found; call line untouched";
  return o;
}

// 6 -------------------------------------------------------------------------

ChangedFile make_file(const std::string& name, const std::string& before, const std::string& after,
                      JointVerdict joint) {
  ChangedFile f;
  f.file_name = name;
  f.file_language = Language::C;
  f.code_before = before;
  f.code_after = after;
  f.code_change = extract_hunks(before, after);
  f.joint = joint;
  return f;
}

std::string c_function(const std::string& name, const std::string& body) {
  return "int " + name + "(int x)\n{\n" + body + "  return x;\n}\n\n";
}

Outcome label_rules() {
  Outcome o;
  const ChangedFile related = make_file(
      "src/a.c",
      c_function("f1", "  x += 1;\n") + c_function("f2", "  x += 2;\n") + c_function("f3", "  x += 3;\n"),
      c_function("f1", "  x += 10;\n") + c_function("f2", "  x += 2;\n") + c_function("f3", "  x += 30;\n"),
      JointVerdict::Related);
  const ChangedFile unrelated = make_file("src/b.c", c_function("g1", "  x *= 2;\n") + c_function("g2", "  x *= 3;\n"),
                                          c_function("g1", "  x <<= 1;\n") + c_function("g2", "  x *= 3;\n"),
                                          JointVerdict::Unrelated);

  // (name, version) -> expected label, written out by hand. Unaffected
  // functions are identical in both versions and appear once.
  const std::map<std::pair<std::string, Version>, int> want = {
      {{"f1", Version::Before}, 1}, {{"f1", Version::After}, 0}, {{"f2", Version::Before}, 0},
      {{"f3", Version::Before}, 1}, {{"f3", Version::After}, 0}, {{"g1", Version::Before}, 0},
      {{"g1", Version::After}, 0},  {{"g2", Version::Before}, 0},
  };
  std::map<std::pair<std::string, Version>, int> got;
  for (const auto* f : {&related, &unrelated}) {
    const auto v = index_versions(*f);
    for (const auto& rec : label_functions(*f, v.before, v.after)) got[{rec.name, rec.version}] = to_int(rec.target);
  }
  o.require(got == want, "function label matrix differs");
  o.require(label_file(related) == std::pair{Label::Vulnerable, Label::NonVulnerable}, "related file labels");
  o.require(label_file(unrelated) == std::pair{Label::NonVulnerable, Label::NonVulnerable}, "unrelated file labels");

  std::mt19937 rng(77);
  std::size_t after_records = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    vftest::SynthRepo base = vftest::random_repo(rng, 12, 1);
    vftest::SynthRepo changed = base;
    for (auto& fn : changed.functions)
      if (std::uniform_int_distribution<int>(0, 2)(rng) == 0) fn.calls.push_back("patched");
    if (!changed.functions.empty() && std::uniform_int_distribution<int>(0, 3)(rng) == 0)
      changed.functions.erase(changed.functions.begin());
    if (std::uniform_int_distribution<int>(0, 3)(rng) == 0) changed.functions.push_back({"added_fn", 0, {"memcpy"}});
    const auto b = base.render().begin()->second;
    const auto a = changed.render().begin()->second;
    const JointVerdict joint = static_cast<JointVerdict>(std::uniform_int_distribution<int>(0, 2)(rng));
    const ChangedFile f = make_file("src/mod0.c", b, a, joint);
    const auto v = index_versions(f);
    for (const auto& rec : label_functions(f, v.before, v.after)) {
      if (rec.version != Version::After) continue;
      ++after_records;
      o.require(rec.target == Label::NonVulnerable, "after-version function labelled 1 in trial " +
                                                        std::to_string(trial));
    }
    o.require(label_file(f).second == Label::NonVulnerable, "after-version file labelled 1");
  }
  if (o.pass) o.detail = "matrix exact; " + std::to_string(after_records) + " after-version records all 0";
  return o;
}

// 7 -------------------------------------------------------------------------

Outcome diff_round_trip() {
  Outcome o;
  const auto t0 = Clock::now();
  std::mt19937 rng(7);
  for (int trial = 0; trial < 1000 && o.pass; ++trial) {
    const std::string b = vftest::random_text(rng, 40, 8);
    const std::string a = trial % 2 ? vftest::mutate_text(rng, b, 8) : vftest::random_text(rng, 40, 8);
    ChangedFile f;
    f.file_name = "x.txt";
    f.code_before = b;
    f.code_after = a;
    f.code_change = extract_hunks(b, a);
    o.require(apply_hunks(b, f.code_change) == a, "round trip failed in trial " + std::to_string(trial));
    std::size_t changed = 0;
    for (const auto& h : f.code_change)
      for (const auto& l : h.lines) changed += l.kind != ChangeKind::Context;
    o.require(label_lines(f).size() == changed, "line record count in trial " + std::to_string(trial));
    const std::size_t n = split_lines(b).size(), m = split_lines(a).size();
    o.require(changed == n + m - 2 * vftest::lcs_length(b, a), "non-minimal diff in trial " + std::to_string(trial));
  }
  o.require(seconds_since(t0) < 10.0, "slower than 10 s");
  if (o.pass) o.detail = "1000 pairs";
  return o;
}

// 8 -------------------------------------------------------------------------

std::string run_once(const Config& config, const std::filesystem::path& out) {
  LocalGitSource source(config.source.repos_root);
  std::string tag;
  auto llm = make_llm_client(config.llm, tag);
  const AnalyzerRegistry analyzers = make_analyzer_registry(config.analyzers);
  PipelineServices services;
  services.source = &source;
  services.llm = llm.get();
  services.analyzers = &analyzers;
  services.llm_tag = tag;
  const PipelineResult result = run_pipeline(config, services, Stage::Label);
  write_stage_output(result, Stage::Label, out);
  return vftest::read_file(out);
}

Outcome determinism() {
  Outcome o;
  vftest::TempDir tmp;
  const auto corpus = vftest::build_corpus(tmp.path() / "corpus");
  Config config = load_config(corpus.config);
  const auto transcript = tmp.path() / "transcript.jsonl";
  config.llm.record = transcript;
  run_once(config, tmp.path() / "recorded.jsonl");

  config.llm.record.reset();
  config.llm.mode = "replay";
  config.llm.transcript = transcript;
  const std::string first = run_once(config, tmp.path() / "first.jsonl");
  const std::string second = run_once(config, tmp.path() / "second.jsonl");
  const auto lines = static_cast<std::size_t>(std::count(first.begin(), first.end(), '\n'));
  o.require(lines == 3, "expected 3 records, got " + std::to_string(lines));
  o.require(first == second, "replay runs differ");
  if (o.pass) o.detail = std::to_string(first.size()) + " identical bytes over " + std::to_string(lines) + " records";
  return o;
}

// 9 -------------------------------------------------------------------------

DatasetRecord stats_record(const std::string& project, const std::string& date, Language lang, const std::string& cwe,
                           bool outdated) {
  DatasetRecord r;
  r.entry.language = lang;
  r.entry.cwe_id = cwe;
  r.patch.project = project;
  r.patch.commit_date = parse_timestamp(date);
  r.patch.outdated = outdated;
  return r;
}

Outcome stats_arithmetic() {
  Outcome o;
  const std::vector<DatasetRecord> records = {
      stats_record("linux", "2014-01-10", Language::C, "CWE-119", true),
      stats_record("linux", "2014-03-02", Language::C, "CWE-119", false),
      stats_record("linux", "2014-07-19", Language::C, "CWE-476", false),
      stats_record("ffmpeg", "2014-11-30", Language::C, "CWE-190", false),
      stats_record("ffmpeg", "2015-02-14", Language::C, "CWE-190", false),
      stats_record("tomcat", "2015-05-05", Language::Java, "CWE-20", true),
      stats_record("tomcat", "2015-08-08", Language::Java, "", false),
      stats_record("django", "2016-01-01", Language::Python, "CWE-79", false),
      stats_record("django", "2016-06-06", Language::Python, "CWE-79", false),
      stats_record("v8", "2016-12-31", Language::Cpp, "CWE-416", false),
  };
  const OutdatedReport r = outdated_breakdown(records);
  auto near = [](double a, double b) { return std::fabs(a - b) < 1e-9; };

  o.require(r.total == 10 && r.outdated == 2, "totals");
  o.require(r.by_year.at(2014) == OutdatedBucket{1, 4} && near(r.by_year.at(2014).ratio(), 0.25), "2014 bucket");
  o.require(r.by_year.at(2015) == OutdatedBucket{1, 3} && near(r.by_year.at(2015).ratio(), 1.0 / 3.0), "2015 bucket");
  o.require(r.by_year.at(2016) == OutdatedBucket{0, 3} && near(r.by_year.at(2016).ratio(), 0.0), "2016 bucket");
  o.require(near(r.by_language.at("C").ratio(), 0.2), "C ratio");
  o.require(near(r.by_language.at("Java").ratio(), 0.5), "Java ratio");
  o.require(near(r.by_language.at("C++").ratio(), 0.0), "C++ ratio");
  o.require(near(r.by_project.at("linux").ratio(), 1.0 / 3.0), "linux ratio");
  o.require(near(r.by_project.at("tomcat").ratio(), 0.5), "tomcat ratio");
  o.require(near(r.by_cwe.at("CWE-119").ratio(), 0.5), "CWE-119 ratio");
  o.require(r.by_cwe.at("(none)") == OutdatedBucket{0, 1}, "(none) bucket");
  o.require(r.language_share.size() == 2 && near(r.language_share.at("C"), 0.5) &&
                near(r.language_share.at("Java"), 0.5),
            "language share");
  if (o.pass) o.detail = "2014 25%, 2015 33.33%, 2016 0%";
  return o;
}

// 10 ------------------------------------------------------------------------

Outcome analyzer_matrix() {
  Outcome o;
  const AnalyzerRegistry registry = mock_registry();
  const AnalyzerMatrix matrix = AnalyzerMatrix::standard();
  const std::vector<std::string> all = {std::string(kCppcheck), std::string(kFlawfinder), std::string(kRats),
                                        std::string(kSemgrep)};
  struct Case {
    Language lang;
    std::string path;
    std::vector<std::string> want;
  };
  const Case cases[] = {
      {Language::C, "a.c", all},
      {Language::Cpp, "a.cc", all},
      {Language::Python, "a.py", {std::string(kRats), std::string(kSemgrep)}},
      {Language::Java, "A.java", {std::string(kSemgrep)}},
  };
  std::string summary;
  for (const auto& c : cases) {
    ChangedFile f;
    f.file_name = c.path;
    f.file_language = c.lang;
    f.code_before = "strcpy(dst, src);\n";
    f.code_after = "strlcpy(dst, src, n);\n";
    f.code_change = extract_hunks(f.code_before, f.code_after);
    const AnalysisResult res = run_analyzers(f, matrix, registry);
    o.require(res.ran == c.want, std::string(to_string(c.lang)) + " dispatch differs");
    o.require(res.findings.size() == c.want.size(), std::string(to_string(c.lang)) + " finding count");
    summary += std::string(to_string(c.lang)) + "=" + std::to_string(res.ran.size()) + " ";
  }
  if (o.pass) o.detail = summary;
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"joint decision truth table", joint_table},
      {"ttm_page_alloc.c outdated replay", ttm_replay},
      {"suffix filter", suffix_fixture},
      {"callee tree oracle", callee_oracle},
      {"caller root extraction", caller_root},
      {"label rules", label_rules},
      {"diff round trip", diff_round_trip},
      {"replay determinism", determinism},
      {"stats arithmetic", stats_arithmetic},
      {"analyzer matrix dispatch", analyzer_matrix},
  };
  int failed = 0;
  int n = 0;
  for (const auto& [name, fn] : criteria) {
    ++n;
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    if (!o.pass) ++failed;
    std::printf("[%s] %2d %s: %s\n", o.pass ? "PASS" : "FAIL", n, name, o.detail.c_str());
  }
  std::printf("%d/%d criteria passed\n", n - failed, n);
  return failed == 0 ? 0 : 1;
}
