#include "fixtures.hpp"

#include <stdlib.h>

#include <algorithm>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "vulnforge/serialize.hpp"
#include "vulnforge/subprocess.hpp"

namespace vftest {

TempDir::TempDir() {
  std::string tmpl = (std::filesystem::temp_directory_path() / "vftest-XXXXXX").string();
  if (!mkdtemp(tmpl.data())) throw std::runtime_error("mkdtemp failed");
  path_ = tmpl;
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << content;
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

FixtureRepo::FixtureRepo(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::filesystem::create_directories(dir_);
  git({"init", "-q", "-b", "main"});
}

std::string FixtureRepo::git(const std::vector<std::string>& args, const std::string& date) const {
  std::vector<std::string> argv{"env"};
  if (!date.empty()) {
    argv.push_back("GIT_AUTHOR_DATE=" + date);
    argv.push_back("GIT_COMMITTER_DATE=" + date);
  }
  argv.insert(argv.end(), {"git", "-C", dir_.string(), "-c", "user.name=Fixture", "-c",
                           "user.email=fixture@example.com", "-c", "commit.gpgsign=false"});
  argv.insert(argv.end(), args.begin(), args.end());
  const auto r = vulnforge::run_process(argv, {});
  if (r.exit_code != 0) throw std::runtime_error("git failed: " + r.err);
  return r.out;
}

void FixtureRepo::write(const std::string& path, const std::string& content) { write_file(dir_ / path, content); }

void FixtureRepo::remove(const std::string& path) { std::filesystem::remove(dir_ / path); }

std::string FixtureRepo::commit(const std::string& message, const std::string& date) {
  git({"add", "-A"});
  git({"commit", "-q", "--allow-empty", "-m", message}, date);
  std::string id = git({"rev-parse", "HEAD"});
  while (!id.empty() && (id.back() == '\n' || id.back() == '\r')) id.pop_back();
  return id;
}

// ---------------------------------------------------------------------------

namespace {

std::vector<std::string> lines_of(const std::string& text) {
  // Each element keeps its terminator so a missing final newline is distinct.
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const auto nl = text.find('\n', pos);
    if (nl == std::string::npos) {
      out.push_back(text.substr(pos));
      break;
    }
    out.push_back(text.substr(pos, nl - pos + 1));
    pos = nl + 1;
  }
  return out;
}

std::string join(const std::vector<std::string>& lines) {
  std::string out;
  for (const auto& l : lines) out += l;
  return out;
}

}  // namespace

std::string random_text(std::mt19937& rng, int max_lines, int alphabet) {
  std::uniform_int_distribution<int> count(0, max_lines), word(0, alphabet - 1), coin(0, 4);
  const int n = count(rng);
  std::string out;
  for (int i = 0; i < n; ++i) out += "line" + std::to_string(word(rng)) + "\n";
  if (!out.empty() && coin(rng) == 0) out.pop_back();
  return out;
}

std::string mutate_text(std::mt19937& rng, const std::string& base, int alphabet) {
  std::vector<std::string> lines = lines_of(base);
  for (auto& l : lines)
    if (l.empty() || l.back() != '\n') l += '\n';
  std::uniform_int_distribution<int> op(0, 3), word(0, alphabet - 1), edits(0, 6), coin(0, 4);
  const int n = edits(rng);
  for (int k = 0; k < n; ++k) {
    std::uniform_int_distribution<std::size_t> at(0, lines.size());
    const std::size_t i = at(rng);
    switch (op(rng)) {
      case 0:
      case 1:
        lines.insert(lines.begin() + static_cast<std::ptrdiff_t>(i), "line" + std::to_string(word(rng)) + "\n");
        break;
      case 2:
        if (i < lines.size()) lines.erase(lines.begin() + static_cast<std::ptrdiff_t>(i));
        break;
      default:
        if (i < lines.size()) lines[i] = "line" + std::to_string(word(rng)) + "\n";
    }
  }
  std::string out = join(lines);
  if (!out.empty() && coin(rng) == 0) out.pop_back();
  return out;
}

std::size_t lcs_length(const std::string& a, const std::string& b) {
  const auto x = lines_of(a), y = lines_of(b);
  std::vector<std::size_t> prev(y.size() + 1, 0), cur(y.size() + 1, 0);
  for (std::size_t i = 1; i <= x.size(); ++i) {
    for (std::size_t j = 1; j <= y.size(); ++j)
      cur[j] = x[i - 1] == y[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    std::swap(prev, cur);
  }
  return prev[y.size()];
}

// ---------------------------------------------------------------------------

std::string SynthRepo::file_name(int file) const { return "src/mod" + std::to_string(file) + ".c"; }

vulnforge::RepoSnapshot SynthRepo::render() const {
  std::vector<std::string> text(static_cast<std::size_t>(files));
  for (int f = 0; f < files; ++f) text[f] = "#include <string.h>\n\nstruct state { int depth; int (*cb)(int); };\n\n";
  for (const auto& fn : functions) {
    std::string& t = text[static_cast<std::size_t>(fn.file)];
    t += "/* decoy_comment(1) */\nint " + fn.name + "(int x)\n{\n  int y = x;\n";
    for (const auto& c : fn.calls) t += "  y += " + c + "(y);\n";
    t += "  const char *s = \"decoy_string(2)\";\n  if (y > 3) {\n    y -= 1;\n  }\n  return y;\n}\n\n";
  }
  vulnforge::RepoSnapshot snap;
  for (int f = 0; f < files; ++f) snap[file_name(f)] = text[static_cast<std::size_t>(f)];
  return snap;
}

SynthRepo random_repo(std::mt19937& rng, int max_functions, int max_files) {
  SynthRepo repo;
  repo.files = std::uniform_int_distribution<int>(1, max_files)(rng);
  const int n = std::uniform_int_distribution<int>(1, max_functions)(rng);
  const int pool = std::max(1, n * 4 / 5);
  std::uniform_int_distribution<int> pick_file(0, repo.files - 1), pick_name(0, pool - 1), ncalls(0, 4),
      lib(0, 9);
  std::set<std::pair<int, std::string>> taken;
  int fresh = pool;
  for (int i = 0; i < n; ++i) {
    SynthFunction fn;
    fn.file = pick_file(rng);
    fn.name = "fn" + std::to_string(pick_name(rng));
    while (taken.count({fn.file, fn.name})) fn.name = "fn" + std::to_string(fresh++);
    taken.insert({fn.file, fn.name});
    repo.functions.push_back(std::move(fn));
  }
  for (auto& fn : repo.functions) {
    const int k = ncalls(rng);
    for (int c = 0; c < k; ++c) {
      if (lib(rng) == 0)
        fn.calls.push_back("memcpy");
      else
        fn.calls.push_back(repo.functions[std::uniform_int_distribution<std::size_t>(0, repo.functions.size() - 1)(rng)].name);
    }
  }
  return repo;
}

std::set<std::pair<std::string, std::string>> reachable(const SynthRepo& repo, const std::vector<std::size_t>& roots,
                                                        int depth_limit) {
  // All-pairs shortest call distances (Floyd-Warshall) over name-resolved edges.
  const std::size_t n = repo.functions.size();
  constexpr int inf = std::numeric_limits<int>::max() / 4;
  std::vector<std::vector<int>> d(n, std::vector<int>(n, inf));
  for (std::size_t i = 0; i < n; ++i) {
    d[i][i] = 0;
    for (const auto& call : repo.functions[i].calls)
      for (std::size_t j = 0; j < n; ++j)
        if (repo.functions[j].name == call && i != j) d[i][j] = std::min(d[i][j], 1);
  }
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (d[i][k] + d[k][j] < d[i][j]) d[i][j] = d[i][k] + d[k][j];
  std::set<std::pair<std::string, std::string>> out;
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t r : roots)
      if (d[r][j] <= depth_limit) out.insert({repo.file_name(repo.functions[j].file), repo.functions[j].name});
  return out;
}

// ---------------------------------------------------------------------------

WrapperFixture wrapper_fixture() {
  WrapperFixture f;
  f.before =
      "#include <stdlib.h>\n"
      "\n"
      "void *xmalloc(size_t n)\n"
      "{\n"
      "  void *p = malloc(n);\n"
      "  if (!p)\n"
      "    abort();\n"
      "  return p;\n"
      "}\n"
      "\n"
      "void *checked_xmalloc(size_t count, size_t size)\n"
      "{\n"
      "  size_t total = count * size;\n"
      "  return xmalloc(total);\n"
      "}\n";
  f.after =
      "#include <stdlib.h>\n"
      "\n"
      "void *xmalloc(size_t n)\n"
      "{\n"
      "  void *p = malloc(n);\n"
      "  if (!p)\n"
      "    abort();\n"
      "  return p;\n"
      "}\n"
      "\n"
      "void *checked_xmalloc(size_t count, size_t size)\n"
      "{\n"
      "  if (size && count > SIZE_MAX / size)\n"
      "    return NULL;\n"
      "  size_t total = count * size;\n"
      "  return xmalloc(total);\n"
      "}\n";
  // Make the fix replace line 13 rather than only insert before it.
  f.after.replace(f.after.find("  size_t total = count * size;\n"), 31, "  size_t total = (size_t)count * size;\n");
  f.call_line = 14;
  return f;
}

namespace {

std::string ttm_source(int revision) {
  std::string s =
      "#include <linux/list.h>\n"
      "#include \"ttm_page_alloc.h\"\n"
      "\n"
      "static struct ttm_page_pool *ttm_get_pool(int flags, bool huge)\n"
      "{\n"
      "  return huge ? &global_pool.huge : &global_pool.normal;\n"
      "}\n"
      "\n"
      "static int ttm_get_pages(struct page **pages, unsigned npages, int flags)\n"
      "{\n"
      "  struct ttm_page_pool *pool = ttm_get_pool(flags, npages > 1);\n"
      "  unsigned i = 0;\n";
  if (revision == 0) {
    s += "  while (i < npages) {\n"
         "    pages[i] = alloc_page(flags);\n";
  } else if (revision == 1) {
    s += "  while (i < npages && pool) {\n"
         "    pages[i] = alloc_page(flags);\n";
  } else {
    s += "  while (i < npages && pool) {\n"
         "    if (i + HPAGE_PMD_NR <= npages && ttm_huge_ok(pages, i))\n"
         "      pages[i] = alloc_huge_page(flags);\n"
         "    else\n"
         "      pages[i] = alloc_page(flags);\n";
  }
  s += "    if (!pages[i])\n"
       "      return -ENOMEM;\n"
       "    ++i;\n"
       "  }\n"
       "  return 0;\n"
       "}\n";
  return s;
}

}  // namespace

TtmHistory build_ttm_history(FixtureRepo& repo) {
  TtmHistory h;
  repo.write(kTtmPath, ttm_source(0));
  repo.write(kTtmCompanion, "2012-01-10 import\n");
  repo.write("drivers/gpu/drm/ttm/Makefile", "obj-y += ttm_page_alloc.o\n");
  h.initial = repo.commit("drm/ttm: import page allocator", "2012-01-10T09:00:00Z");
  repo.write(kTtmPath, ttm_source(1));
  repo.write(kTtmCompanion, "2012-01-10 import\n2012-05-02 pool check\n");
  h.original = repo.commit("drm/ttm: fix huge page allocation", "2012-05-02T09:00:00Z");
  repo.write(kTtmPath, ttm_source(2));
  repo.write(kTtmCompanion, "2012-01-10 import\n2012-05-02 pool check\n2012-06-15 huge start page\n");
  h.follow_up = repo.commit("drm/ttm: fix start page for huge page check", "2012-06-15T09:00:00Z");
  return h;
}

// ---------------------------------------------------------------------------

vulnforge::VulnEntry make_entry(const std::string& cve, const std::string& date, vulnforge::Language lang,
                                std::vector<vulnforge::CommitRef> commits) {
  vulnforge::VulnEntry e;
  e.cve_id = cve;
  e.cwe_id = "CWE-120";
  e.language = lang;
  e.resources = {"https://nvd.nist.gov/vuln/detail/" + cve};
  e.cve_description = "Buffer overflow in header parsing.";
  e.publish_date = vulnforge::parse_timestamp(date);
  e.cvss = 7.5;
  e.av = "NETWORK";
  e.ac = "LOW";
  e.pr = "NONE";
  e.ui = "NONE";
  e.s = "UNCHANGED";
  e.c = "HIGH";
  e.i = "HIGH";
  e.a = "HIGH";
  e.cwe_description = "The program copies an input buffer to an output buffer without checking its size.";
  e.cwe_solution = "Check buffer boundaries before copying.";
  e.cwe_consequence = "Memory corruption.";
  e.cwe_method = "Static analysis.";
  e.commits = std::move(commits);
  return e;
}

namespace {

const char* kImageV0 =
    "#include <string.h>\n"
    "#include \"util.h\"\n"
    "\n"
    "struct header { char name[16]; int width; int height; };\n"
    "\n"
    "static int read_header(struct header *h, const char *src)\n"
    "{\n"
    "  strcpy(h->name, src);\n"
    "  h->width = parse_int(src + 16);\n"
    "  h->height = parse_int(src + 20);\n"
    "  return check_dims(h->width, h->height);\n"
    "}\n"
    "\n"
    "int parse_image(const char *src, int len)\n"
    "{\n"
    "  struct header h;\n"
    "  if (len < 24)\n"
    "    return -1;\n"
    "  if (read_header(&h, src) != 0)\n"
    "    return -1;\n"
    "  return h.width * h.height;\n"
    "}\n";

const char* kUtilV0 =
    "#include \"util.h\"\n"
    "\n"
    "int parse_int(const char *s)\n"
    "{\n"
    "  int v = 0;\n"
    "  while (*s >= '0' && *s <= '9')\n"
    "    v = v * 10 + (*s++ - '0');\n"
    "  return v;\n"
    "}\n"
    "\n"
    "int check_dims(int w, int h)\n"
    "{\n"
    "  return (w > 0 && h > 0) ? 0 : -1;\n"
    "}\n";

const char* kAlloc =
    "#include <stdlib.h>\n"
    "\n"
    "void *xmalloc(size_t n)\n"
    "{\n"
    "  void *p = malloc(n);\n"
    "  if (!p)\n"
    "    abort();\n"
    "  return p;\n"
    "}\n"
    "\n"
    "struct header *new_header(void)\n"
    "{\n"
    "  return xmalloc(sizeof(struct header));\n"
    "}\n";

const char* kViewsV0 =
    "import json\n"
    "\n"
    "\n"
    "def load(request):\n"
    "    return json.loads(request.body)\n"
    "\n"
    "\n"
    "def compute(request):\n"
    "    expr = load(request)[\"expr\"]\n"
    "    return eval(expr)\n";

const char* kViewsV1 =
    "import ast\n"
    "import json\n"
    "\n"
    "\n"
    "def load(request):\n"
    "    return json.loads(request.body)\n"
    "\n"
    "\n"
    "def compute(request):\n"
    "    expr = load(request)[\"expr\"]\n"
    "    return ast.literal_eval(expr)\n";

std::string replace(std::string text, const std::string& from, const std::string& to) {
  const auto at = text.find(from);
  if (at == std::string::npos) throw std::logic_error("fixture text not found: " + from);
  return text.replace(at, from.size(), to);
}

}  // namespace

Corpus build_corpus(const std::filesystem::path& root) {
  using vulnforge::Language;
  Corpus c;
  c.root = root;
  c.entries = root / "entries.jsonl";
  c.config = root / "vulnforge.toml";

  FixtureRepo img(root / "repos" / "acme" / "imgtool");
  img.write("src/image.c", kImageV0);
  img.write("src/util.c", kUtilV0);
  img.write("src/alloc.c", kAlloc);
  img.write("README.md", "# imgtool\n");
  img.commit("Initial import", "2013-06-01T12:00:00Z");

  const std::string image_v1 = replace(kImageV0, "  strcpy(h->name, src);\n",
                                       "  strncpy(h->name, src, sizeof h->name - 1);\n");
  img.write("src/image.c", image_v1);
  img.write("src/util.c", replace(replace(replace(kUtilV0, "  int v = 0;\n", "  int value = 0;\n"),
                                          "    v = v * 10", "    value = value * 10"),
                                  "  return v;\n", "  return value;\n"));
  img.write("README.md", "# imgtool\n\nHeader names are truncated to 15 bytes.\n");
  const std::string c1 = img.commit(
      "Fix header name overflow\n\nLLM-Verdict: src/util.c NO\nLLM-Verdict: README.md NO\n", "2014-03-01T12:00:00Z");

  std::string image_v2 = replace(image_v1, "  strncpy(h->name, src, sizeof h->name - 1);\n",
                                 "  strncpy(h->name, src, sizeof h->name - 1);\n  h->name[sizeof h->name - 1] = '\\0';\n");
  image_v2 = replace(image_v2, "  if (len < 24)\n", "  if (len < 24 || !src)\n");
  img.write("src/image.c", image_v2);
  const std::string c2 = img.commit("Terminate header name and reject null input\n", "2014-09-10T12:00:00Z");

  FixtureRepo web(root / "repos" / "acme" / "pyweb");
  web.write("app/views.py", kViewsV0);
  web.commit("Initial import", "2014-11-01T12:00:00Z");
  web.write("app/views.py", kViewsV1);
  const std::string c3 =
      web.commit("Stop evaluating request input\n\nLLM-Verdict: app/views.py YES\n", "2015-02-01T12:00:00Z");

  auto e1 = make_entry("CVE-2014-1001", "2014-03-05", Language::C, {{"acme/imgtool", c1}});
  auto e2 = make_entry("CVE-2014-2002", "2014-09-12", Language::C, {{"acme/imgtool", c2}});
  e2.cwe_id = "CWE-170";
  e2.cwe_description = "The software does not terminate a string as expected.";
  auto e3 = make_entry("CVE-2015-3003", "2015-02-03", Language::Python, {{"acme/pyweb", c3}});
  e3.cwe_id = "CWE-95";
  e3.cwe_description = "The software evaluates input as code.";
  e3.cvss = 9.8;

  std::string entries;
  for (const auto* e : {&e2, &e3, &e1}) entries += vulnforge::entry_to_line(*e) + "\n";
  write_file(c.entries, entries);
  write_file(c.config,
             "[source]\n"
             "entries = \"entries.jsonl\"\n"
             "repos = \"repos\"\n"
             "\n"
             "[llm]\n"
             "mode = \"mock\"\n"
             "\n"
             "[analyzers]\n"
             "mode = \"mock\"\n"
             "\n"
             "[export]\n"
             "out = \"dataset.jsonl\"\n"
             "\n"
             "[workers]\n"
             "untangle = 2\n"
             "extract = 2\n");
  c.commits = {c1, c2, c3};
  return c;
}

std::string add_merge_entry(Corpus& corpus) {
  FixtureRepo img(corpus.root / "repos" / "acme" / "imgtool");
  img.git({"checkout", "-q", "-b", "feature"});
  img.write("src/extra.c", "int extra(void)\n{\n  return 1;\n}\n");
  img.commit("Add extra", "2014-10-01T12:00:00Z");
  img.git({"checkout", "-q", "main"});
  img.write("docs/notes.txt", "notes\n");
  img.commit("Add notes", "2014-10-02T12:00:00Z");
  img.git({"merge", "-q", "--no-ff", "-m", "Merge feature", "feature"}, "2014-10-03T12:00:00Z");
  std::string merge = img.git({"rev-parse", "HEAD"});
  while (!merge.empty() && merge.back() == '\n') merge.pop_back();

  const auto e = make_entry("CVE-2014-4004", "2014-10-05", vulnforge::Language::C, {{"acme/imgtool", merge}});
  std::ofstream out(corpus.entries, std::ios::binary | std::ios::app);
  out << vulnforge::entry_to_line(e) << "\n";
  corpus.commits.push_back(merge);
  return merge;
}

}  // namespace vftest
