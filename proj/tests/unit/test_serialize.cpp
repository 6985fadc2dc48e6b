#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "vulnforge/depgraph.hpp"
#include "vulnforge/diff.hpp"
#include "vulnforge/error.hpp"
#include "vulnforge/labeling.hpp"
#include "vulnforge/serialize.hpp"

using namespace vulnforge;

namespace {

ErrorKind entry_error(const std::string& line) {
  try {
    parse_entry_line(line);
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "accepted: " << line;
  return ErrorKind::IoError;
}

DatasetRecord sample_record(const std::string& cve, const std::string& date, const std::string& commit) {
  const auto entry = vftest::make_entry(cve, date, Language::C, {{"acme/x", commit}});
  const auto fx = vftest::wrapper_fixture();
  Patch patch;
  patch.commit_id = commit;
  patch.commit_message = "Check for overflow\n";
  patch.commit_date = parse_timestamp(date);
  patch.project = "acme/x";
  patch.parent_patch = "parent" + commit;
  ChangedFile f;
  f.file_name = "lib/xmalloc.c";
  f.file_language = Language::C;
  f.code_before = fx.before;
  f.code_after = fx.after + "int tail";
  f.code_change = extract_hunks(f.code_before, f.code_after);
  f.llm_verdict = LlmVerdict::Yes;
  f.static_verdict = StaticVerdict::Related;
  f.joint = JointVerdict::Related;
  patch.files = {f};

  SyntaxIndex index;
  index.add(parse_source(f.file_name, f.code_before, Language::C), f.code_before);
  const Dependencies deps = extract_dependencies({{f.file_name, {{f.file_name, {13}}}}}, index);
  std::vector<RepositoryContext> trees;
  for (const auto* t : {&deps.callers[0], &deps.callees[0]})
    trees.push_back({*t, inter_procedural_code(*t, index), Label::Vulnerable});
  return assemble_record(entry, patch, patch.files, trees, false);
}

}  // namespace

TEST(EntryCodec, RoundTrip) {
  auto e = vftest::make_entry("CVE-2014-0160", "2014-04-07", Language::Cpp, {{"openssl/openssl", "96db902"}});
  e.cve_description = "Quote \" and newline\n and unicode \xc3\xa9";
  const std::string line = entry_to_line(e);
  EXPECT_EQ(line.find('\n'), std::string::npos);
  EXPECT_EQ(parse_entry_line(line), e);
  EXPECT_NE(line.find("\"CVE-ID\":\"CVE-2014-0160\""), std::string::npos);
}

TEST(EntryCodec, RejectsMalformedLines) {
  EXPECT_EQ(entry_error("{"), ErrorKind::MalformedEntry);
  EXPECT_EQ(entry_error("[]"), ErrorKind::MalformedEntry);
  EXPECT_EQ(entry_error(R"({"CWE-ID":"CWE-1","Language":"C","Publish-Date":"2014-01-01","CVSS":5})"),
            ErrorKind::MalformedEntry);
  EXPECT_EQ(entry_error(R"({"CVE-ID":"CVE-2014-1","Language":"C","Publish-Date":"2014-01-01","CVSS":"high"})"),
            ErrorKind::MalformedEntry);
  EXPECT_EQ(entry_error(R"({"CVE-ID":"CVE-2014-1","Language":"Rust","Publish-Date":"2014-01-01","CVSS":5})"),
            ErrorKind::MalformedEntry);
  EXPECT_EQ(entry_error(R"({"CVE-ID":"CVE-2014-1","Language":"C","Publish-Date":"soon","CVSS":5})"),
            ErrorKind::MalformedEntry);
  EXPECT_NO_THROW(parse_entry_line(R"({"CVE-ID":"CVE-2014-1","Language":"C","Publish-Date":"2014-01-01","CVSS":"5.0"})"));
}

TEST(PatchCodec, RoundTripKeepsOptionalFields) {
  const DatasetRecord r = sample_record("CVE-2014-1001", "2014-03-05", "c1");
  Patch p = r.patch;
  p.child_patch = "c2";
  p.outdated = true;
  EXPECT_EQ(patch_from_line(patch_to_line(p)), p);
  p.parent_patch.reset();
  EXPECT_EQ(patch_from_line(patch_to_line(p)), p);
}

TEST(RecordCodec, RoundTripAllLayers) {
  const DatasetRecord r = sample_record("CVE-2014-1001", "2014-03-05", "c1");
  ASSERT_EQ(r.repository_level.size(), 2u);
  EXPECT_FALSE(r.function_level.empty());
  EXPECT_FALSE(r.line_level.empty());
  EXPECT_FALSE(r.line_level.back().change.newline);
  const std::string line = record_to_line(r);
  EXPECT_EQ(record_from_line(line), r);
  EXPECT_EQ(record_to_line(record_from_line(line)), line);
  EXPECT_NE(line.find("\"Inter-procedural Code\""), std::string::npos);
}

TEST(Dataset, SortedExportAndImport) {
  std::vector<DatasetRecord> records = {
      sample_record("CVE-2015-0002", "2015-01-01", "b"),
      sample_record("CVE-2014-0009", "2014-01-01", "z"),
      sample_record("CVE-2014-0009", "2014-01-01", "a"),
      sample_record("CVE-2014-0001", "2014-01-01", "m"),
  };
  vftest::TempDir tmp;
  const auto path = tmp.path() / "out" / "data.jsonl";
  export_dataset(records, path);
  const auto back = import_dataset(path);
  ASSERT_EQ(back.size(), 4u);
  EXPECT_EQ(back[0].entry.cve_id, "CVE-2014-0001");
  EXPECT_EQ(back[1].patch.commit_id, "a");
  EXPECT_EQ(back[2].patch.commit_id, "z");
  EXPECT_EQ(back[3].entry.cve_id, "CVE-2015-0002");
  sort_records(records);
  EXPECT_EQ(back, records);
}

TEST(Dataset, ImportErrors) {
  vftest::TempDir tmp;
  EXPECT_THROW(import_dataset(tmp.path() / "missing.jsonl"), Error);
  vftest::write_file(tmp.path() / "bad.jsonl", "{\"not\": \"a record\"}\n");
  EXPECT_THROW(import_dataset(tmp.path() / "bad.jsonl"), Error);
}
