#include "vulnforge/stats.hpp"

#include <algorithm>
#include <cstdio>

#include "json.hpp"

namespace vulnforge {

namespace {

void count(OutdatedBucket& b, bool outdated) {
  ++b.total;
  if (outdated) ++b.outdated;
}

template <typename Map>
void merge_into(Map& into, const Map& from) {
  for (const auto& [k, b] : from) {
    into[k].outdated += b.outdated;
    into[k].total += b.total;
  }
}

void finish_shares(OutdatedReport& r) {
  r.language_share.clear();
  if (r.outdated == 0) return;
  for (const auto& [lang, b] : r.by_language)
    if (b.outdated > 0)
      r.language_share[lang] = static_cast<double>(b.outdated) / static_cast<double>(r.outdated);
}

std::string percent(double ratio) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f%%", ratio * 100.0);
  return buf;
}

}  // namespace

OutdatedReport outdated_breakdown(const std::vector<DatasetRecord>& records) {
  OutdatedReport r;
  for (const auto& rec : records) {
    const bool outdated = rec.patch.outdated;
    ++r.total;
    if (outdated) ++r.outdated;
    count(r.by_cwe[rec.entry.cwe_id.empty() ? "(none)" : rec.entry.cwe_id], outdated);
    count(r.by_year[year_of(rec.patch.commit_date)], outdated);
    count(r.by_project[rec.patch.project], outdated);
    count(r.by_language[std::string(to_string(rec.entry.language))], outdated);
  }
  finish_shares(r);
  return r;
}

OutdatedReport merge_reports(const std::vector<OutdatedReport>& parts) {
  OutdatedReport r;
  for (const auto& p : parts) {
    r.total += p.total;
    r.outdated += p.outdated;
    merge_into(r.by_cwe, p.by_cwe);
    merge_into(r.by_year, p.by_year);
    merge_into(r.by_project, p.by_project);
    merge_into(r.by_language, p.by_language);
  }
  finish_shares(r);
  return r;
}

std::string report_to_json(const OutdatedReport& r) {
  using Json = nlohmann::ordered_json;
  auto buckets = [](const auto& map) {
    Json out = Json::object();
    for (const auto& [k, b] : map) {
      std::string key;
      if constexpr (std::is_same_v<std::decay_t<decltype(k)>, int>)
        key = std::to_string(k);
      else
        key = k;
      out[key] = {{"outdated", b.outdated}, {"total", b.total}, {"ratio", b.ratio()}};
    }
    return out;
  };
  Json j;
  j["total"] = r.total;
  j["outdated"] = r.outdated;
  j["cwe"] = buckets(r.by_cwe);
  j["year"] = buckets(r.by_year);
  j["project"] = buckets(r.by_project);
  j["language"] = buckets(r.by_language);
  j["language_share"] = Json::object();
  for (const auto& [k, v] : r.language_share) j["language_share"][k] = v;
  return j.dump(2);
}

std::string report_to_table(const OutdatedReport& r) {
  std::vector<std::vector<std::string>> rows{{"dimension", "key", "outdated", "total", "ratio"}};
  auto add = [&](const std::string& dim, const std::string& key, const OutdatedBucket& b) {
    rows.push_back({dim, key, std::to_string(b.outdated), std::to_string(b.total), percent(b.ratio())});
  };
  for (const auto& [k, b] : r.by_cwe) add("cwe", k, b);
  for (const auto& [k, b] : r.by_year) add("year", std::to_string(k), b);
  for (const auto& [k, b] : r.by_project) add("project", k, b);
  for (const auto& [k, b] : r.by_language) add("language", k, b);
  for (const auto& [k, v] : r.language_share) rows.push_back({"share", k, "", "", percent(v)});
  add("all", "*", {r.outdated, r.total});

  std::vector<std::size_t> width(rows.front().size(), 0);
  for (const auto& row : rows)
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  std::string out;
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      const bool numeric = c >= 2;
      const std::string pad(width[c] - row[c].size(), ' ');
      out += numeric ? pad + row[c] : row[c] + pad;
      if (c + 1 < row.size()) out += "  ";
    }
    while (!out.empty() && out.back() == ' ') out.pop_back();
    out += '\n';
  }
  return out;
}

}  // namespace vulnforge
