#include "vulnforge/analyzers.hpp"

#include <stdlib.h>

#include <algorithm>
#include <fstream>
#include <regex>
#include <set>

#include "json.hpp"
#include "vulnforge/error.hpp"
#include "vulnforge/ingest.hpp"
#include "vulnforge/subprocess.hpp"

namespace vulnforge {

AnalyzerMatrix AnalyzerMatrix::standard() {
  const std::vector<std::string> c_tools{std::string(kCppcheck), std::string(kFlawfinder), std::string(kRats),
                                         std::string(kSemgrep)};
  AnalyzerMatrix m;
  m.tools[Language::C] = c_tools;
  m.tools[Language::Cpp] = c_tools;
  m.tools[Language::Python] = {std::string(kRats), std::string(kSemgrep)};
  m.tools[Language::Java] = {std::string(kSemgrep)};
  return m;
}

const std::vector<std::string>& AnalyzerMatrix::for_language(Language lang) const {
  static const std::vector<std::string> none;
  const auto it = tools.find(lang);
  return it == tools.end() ? none : it->second;
}

void AnalyzerRegistry::add(std::shared_ptr<Analyzer> analyzer) {
  const std::string name = analyzer->name();
  analyzers_[name] = std::move(analyzer);
}

std::shared_ptr<Analyzer> AnalyzerRegistry::find(const std::string& name) const {
  const auto it = analyzers_.find(name);
  return it == analyzers_.end() ? nullptr : it->second;
}

AnalysisResult run_analyzers(const ChangedFile& file, const AnalyzerMatrix& matrix, const AnalyzerRegistry& registry) {
  AnalysisResult result;
  const auto& tools = matrix.for_language(file.file_language);
  for (const auto& tool : tools) {
    const auto analyzer = registry.find(tool);
    if (!analyzer) {
      result.failures.push_back({tool, "no adapter registered"});
      continue;
    }
    try {
      auto findings = analyzer->analyze(file.file_name, file.code_before);
      result.findings.insert(result.findings.end(), std::make_move_iterator(findings.begin()),
                             std::make_move_iterator(findings.end()));
      result.ran.push_back(tool);
    } catch (const Error& e) {
      result.failures.push_back({tool, e.what()});
    }
  }
  if (!tools.empty() && result.ran.empty()) {
    std::string msg = file.file_name + ":";
    for (const auto& f : result.failures) msg += " [" + f.tool + "] " + f.message;
    throw Error(ErrorKind::AllAnalyzersFailed, msg);
  }
  return result;
}

StaticVerdict match_findings_to_changes(const std::vector<Finding>& findings, const ChangedFile& file, int slack) {
  std::set<int> lines;
  for (const auto& h : file.code_change)
    for (const auto& l : h.lines)
      if (l.kind != ChangeKind::Add) lines.insert(l.line_number);
  for (const auto& f : findings) {
    const auto it = lines.lower_bound(f.line - slack);
    if (it != lines.end() && *it <= f.line + slack) return StaticVerdict::Related;
  }
  return StaticVerdict::Unrelated;
}

StaticVerdict static_verdict(const AnalysisResult& result, const ChangedFile& file, int slack) {
  if (result.ran.empty()) return StaticVerdict::NotApplicable;
  return match_findings_to_changes(result.findings, file, slack);
}

std::vector<std::string> default_dangerous_functions() {
  return {"strcpy", "strcat", "sprintf", "vsprintf", "gets", "memcpy", "alloca", "xmalloc", "system", "eval",
          "exec",   "popen",  "scanf",   "strncpy",  "realpath"};
}

namespace {

// Blanks out comments and string/char literals, keeping line structure.
std::string mask_code(std::string_view src, Language lang) {
  std::string out(src);
  const bool python = lang == Language::Python;
  std::size_t i = 0;
  auto blank = [&](std::size_t from, std::size_t to) {
    for (std::size_t k = from; k < to && k < out.size(); ++k)
      if (out[k] != '\n') out[k] = ' ';
  };
  while (i < src.size()) {
    const char c = src[i];
    if (!python && c == '/' && i + 1 < src.size() && src[i + 1] == '/') {
      const auto e = std::min(src.find('\n', i), src.size());
      blank(i, e);
      i = e;
    } else if (!python && c == '/' && i + 1 < src.size() && src[i + 1] == '*') {
      const auto e = src.find("*/", i + 2);
      const auto stop = e == std::string_view::npos ? src.size() : e + 2;
      blank(i, stop);
      i = stop;
    } else if (python && c == '#') {
      const auto e = std::min(src.find('\n', i), src.size());
      blank(i, e);
      i = e;
    } else if (c == '"' || c == '\'') {
      std::size_t k = i + 1;
      while (k < src.size() && src[k] != c && src[k] != '\n') k += src[k] == '\\' ? 2 : 1;
      blank(i, std::min(k + 1, src.size()));
      i = k + 1;
    } else {
      ++i;
    }
  }
  return out;
}

}  // namespace

MockAnalyzer::MockAnalyzer(std::string name, std::vector<std::string> dangerous)
    : name_(std::move(name)), dangerous_(std::move(dangerous)) {}

std::vector<Finding> MockAnalyzer::analyze(const std::string& path, std::string_view content) {
  std::vector<Finding> out;
  if (dangerous_.empty()) return out;
  std::string alternation;
  for (const auto& d : dangerous_) alternation += (alternation.empty() ? "" : "|") + d;
  const std::regex call("(^|[^A-Za-z0-9_])(" + alternation + ")\\s*\\(");
  const std::string masked = mask_code(content, detect_file_language(path));
  std::size_t pos = 0;
  int line = 1;
  while (pos <= masked.size()) {
    const auto nl = masked.find('\n', pos);
    const std::string text = masked.substr(pos, nl == std::string::npos ? std::string::npos : nl - pos);
    for (std::sregex_iterator it(text.begin(), text.end(), call), end; it != end; ++it)
      out.push_back({name_, path, line, "dangerous-call." + (*it)[2].str(), "warning",
                     "call to " + (*it)[2].str()});
    if (nl == std::string::npos) break;
    pos = nl + 1;
    ++line;
  }
  return out;
}

AnalyzerRegistry mock_registry(const std::vector<std::string>& dangerous) {
  AnalyzerRegistry r;
  for (auto name : {kCppcheck, kFlawfinder, kRats, kSemgrep})
    r.add(std::make_shared<MockAnalyzer>(std::string(name), dangerous));
  return r;
}

namespace {

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    const auto e = text.find(sep, pos);
    out.push_back(text.substr(pos, e == std::string_view::npos ? std::string_view::npos : e - pos));
    if (e == std::string_view::npos) break;
    pos = e + 1;
  }
  return out;
}

int to_line(std::string_view s) {
  int v = 0;
  for (char c : s) {
    if (c < '0' || c > '9') return 0;
    v = v * 10 + (c - '0');
  }
  return v;
}

std::vector<std::vector<std::string>> parse_csv(std::string_view text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"' && i + 1 < text.size() && text[i + 1] == '"') {
        field += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      row.push_back(std::move(field));
      field.clear();
    } else if (c == '\n') {
      row.push_back(std::move(field));
      field.clear();
      rows.push_back(std::move(row));
      row.clear();
    } else if (c != '\r') {
      field += c;
    }
  }
  if (!field.empty() || !row.empty()) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

std::vector<Finding> parse_cppcheck_output(std::string_view text, const std::string& path) {
  std::vector<Finding> out;
  for (auto line : split(text, '\n')) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    const auto f = split(line, '\t');
    if (f.size() < 5) continue;
    const int n = to_line(f[1]);
    if (n < 1) continue;
    std::string message(f[4]);
    for (std::size_t k = 5; k < f.size(); ++k) message += "\t" + std::string(f[k]);
    out.push_back({std::string(kCppcheck), path, n, std::string(f[2]), std::string(f[3]), message});
  }
  return out;
}

std::vector<Finding> parse_flawfinder_csv(std::string_view text, const std::string& path) {
  std::vector<Finding> out;
  const auto rows = parse_csv(text);
  if (rows.empty()) return out;
  const auto& header = rows.front();
  auto col = [&](const char* name) -> std::size_t {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw Error(ErrorKind::ParseFailure, std::string("flawfinder CSV lacks column ") + name);
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t line_col = col("Line"), level_col = col("Level"), name_col = col("Name"),
                    warn_col = col("Warning");
  const std::size_t width = std::max({line_col, level_col, name_col, warn_col});
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.size() <= width) continue;
    const int n = to_line(row[line_col]);
    if (n < 1) continue;
    out.push_back({std::string(kFlawfinder), path, n, row[name_col], row[level_col], row[warn_col]});
  }
  return out;
}

std::vector<Finding> parse_rats_output(std::string_view text, const std::string& path) {
  static const std::regex re(R"(^(.+):(\d+): (High|Medium|Low): (.+)$)");
  std::vector<Finding> out;
  for (auto line : split(text, '\n')) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    std::match_results<std::string_view::const_iterator> m;
    if (!std::regex_match(line.begin(), line.end(), m, re)) continue;
    const int n = to_line(std::string_view(&*m[2].first, m[2].length()));
    if (n < 1) continue;
    out.push_back({std::string(kRats), path, n, m[4].str(), m[3].str(), m[4].str()});
  }
  return out;
}

std::vector<Finding> parse_semgrep_json(std::string_view text, const std::string& path) {
  std::vector<Finding> out;
  try {
    const auto j = nlohmann::json::parse(text);
    for (const auto& r : j.at("results")) {
      const int n = r.at("start").at("line").get<int>();
      if (n < 1) continue;
      const auto& extra = r.value("extra", nlohmann::json::object());
      out.push_back({std::string(kSemgrep), path, n, r.at("check_id").get<std::string>(),
                     extra.value("severity", std::string("INFO")), extra.value("message", std::string())});
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::ParseFailure, std::string("semgrep JSON: ") + e.what());
  }
  return out;
}

namespace {

class ScratchDir {
 public:
  ScratchDir() {
    std::string tmpl = (std::filesystem::temp_directory_path() / "vulnforge-XXXXXX").string();
    if (!mkdtemp(tmpl.data())) throw Error(ErrorKind::IoError, "cannot create scratch directory");
    path_ = tmpl;
  }
  ~ScratchDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  ScratchDir(const ScratchDir&) = delete;
  ScratchDir& operator=(const ScratchDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace

ToolAnalyzer::ToolAnalyzer(Kind kind, std::string binary, std::string semgrep_config)
    : kind_(kind), binary_(std::move(binary)), semgrep_config_(std::move(semgrep_config)) {}

std::string ToolAnalyzer::name() const {
  switch (kind_) {
    case Kind::Cppcheck: return std::string(kCppcheck);
    case Kind::Flawfinder: return std::string(kFlawfinder);
    case Kind::Rats: return std::string(kRats);
    case Kind::Semgrep: return std::string(kSemgrep);
  }
  return {};
}

std::vector<Finding> ToolAnalyzer::analyze(const std::string& path, std::string_view content) {
  ScratchDir dir;
  const auto file = dir.path() / std::filesystem::path(path).filename();
  {
    std::ofstream out(file, std::ios::binary);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error(ErrorKind::IoError, "cannot write " + file.string());
  }
  std::vector<std::string> argv{binary_};
  switch (kind_) {
    case Kind::Cppcheck:
      argv.insert(argv.end(), {"--quiet", "--enable=warning,style,portability",
                               "--template={file}\t{line}\t{id}\t{severity}\t{message}", file.string()});
      break;
    case Kind::Flawfinder:
      argv.insert(argv.end(), {"--csv", "--quiet", file.string()});
      break;
    case Kind::Rats:
      argv.insert(argv.end(), {"--quiet", "--resultsonly", "-w", "3", file.string()});
      break;
    case Kind::Semgrep:
      argv.insert(argv.end(), {"--json", "--quiet", "--config", semgrep_config_, file.string()});
      break;
  }
  const ProcessResult r = run_process(argv, {});
  // Semgrep exits 1 when it has findings; other tools exit 0.
  const bool ok = r.exit_code == 0 || (kind_ == Kind::Semgrep && r.exit_code == 1);
  if (!ok) throw Error(ErrorKind::ProcessError, name() + " exited with " + std::to_string(r.exit_code) + ": " + r.err);
  switch (kind_) {
    case Kind::Cppcheck: return parse_cppcheck_output(r.err, path);
    case Kind::Flawfinder: return parse_flawfinder_csv(r.out, path);
    case Kind::Rats: return parse_rats_output(r.out, path);
    case Kind::Semgrep: return parse_semgrep_json(r.out, path);
  }
  return {};
}

}  // namespace vulnforge
