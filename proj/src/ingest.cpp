#include "hsgraph/ingest.hpp"

#include <algorithm>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>

#include "hsgraph/error.hpp"
#include "hsgraph/textio.hpp"

namespace hsgraph {

namespace {

using nlohmann::json;

const json& require(const json& obj, const char* name, std::size_t line) {
  auto it = obj.find(name);
  if (it == obj.end()) throw ParseError(line, name, "missing required field");
  return *it;
}

std::string require_string(const json& obj, const char* name,
                           std::size_t line) {
  const json& v = require(obj, name, line);
  if (!v.is_string()) throw ParseError(line, name, "expected a string");
  return v.get<std::string>();
}

std::uint64_t require_count(const json& obj, const char* name,
                            std::size_t line) {
  const json& v = require(obj, name, line);
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer()) {
    throw ParseError(line, name, "must be non-negative");
  }
  throw ParseError(line, name, "expected an integer");
}

}  // namespace

std::vector<PageRecord> parse_pages(std::istream& in) {
  std::vector<PageRecord> pages;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    json obj;
    try {
      obj = json::parse(text);
    } catch (const json::parse_error& e) {
      throw ParseError(line, "", std::string("malformed JSON: ") + e.what());
    }
    if (!obj.is_object()) throw ParseError(line, "", "expected a JSON object");

    PageRecord rec;
    rec.snapshot = require_string(obj, "snapshot", line);
    rec.service = require_string(obj, "service", line);
    if (rec.service.empty()) throw ParseError(line, "service", "empty id");
    rec.path = require_string(obj, "path", line);
    rec.depth = require_count(obj, "depth", line);
    rec.chars = require_count(obj, "chars", line);
    const json& links = require(obj, "links", line);
    if (!links.is_array()) throw ParseError(line, "links", "expected an array");
    rec.links.reserve(links.size());
    for (const auto& l : links) {
      if (!l.is_string()) throw ParseError(line, "links", "expected strings");
      rec.links.push_back(l.get<std::string>());
    }
    pages.push_back(std::move(rec));
  }
  return pages;
}

SummaryTable summarize_services(std::span<const PageRecord> pages) {
  SummaryTable table;
  for (const auto& p : pages) {
    auto [it, fresh] = table.try_emplace(ServiceKey{p.snapshot, p.service});
    auto& s = it->second;
    if (fresh) {
      s.service = p.service;
      s.snapshot = p.snapshot;
    }
    s.tree_height = std::max(s.tree_height, p.depth);
    s.char_count += p.chars;
    s.link_count += p.links.size();
  }
  return table;
}

bool in_link_directory_band(std::uint64_t links, std::uint64_t chars) {
  if (chars == 0) return false;
  // 1/200 <= links/chars <= 1/20, cross-multiplied to stay exact.
  return links * 200 >= chars && links * 20 <= chars;
}

PersistenceReport persistence_report(std::span<const PageRecord> pages) {
  using PageShape = std::vector<std::pair<std::string, std::uint64_t>>;
  struct Presence {
    std::set<std::string> snapshots;
    std::map<std::string, PageShape> shape;
  };

  std::map<std::string, Presence> services;
  std::set<std::string> snapshot_ids;
  for (const auto& p : pages) {
    snapshot_ids.insert(p.snapshot);
    auto& pr = services[p.service];
    pr.snapshots.insert(p.snapshot);
    pr.shape[p.snapshot].emplace_back(p.path, p.depth);
  }
  if (snapshot_ids.size() < 2) throw DataError("insufficient snapshots");

  const auto summaries = summarize_services(pages);

  PersistenceReport report;
  report.snapshots.assign(snapshot_ids.begin(), snapshot_ids.end());
  report.service_count = services.size();

  for (auto& [service, pr] : services) {
    std::vector<std::string> pattern(pr.snapshots.begin(), pr.snapshots.end());
    ++report.membership_counts[pattern];
    if (pr.snapshots.size() != snapshot_ids.size()) continue;

    for (auto& [snap, shape] : pr.shape) std::sort(shape.begin(), shape.end());
    const auto& first_shape = pr.shape.begin()->second;
    const bool same_tree =
        std::all_of(pr.shape.begin(), pr.shape.end(),
                    [&](const auto& kv) { return kv.second == first_shape; });
    if (same_tree) ++report.tree_persistent_count;

    const auto chars_in = [&](const std::string& snap) {
      return summaries.at(ServiceKey{snap, service}).char_count;
    };
    const auto first_chars = chars_in(report.snapshots.front());
    const bool same_chars =
        std::all_of(report.snapshots.begin(), report.snapshots.end(),
                    [&](const std::string& s) { return chars_in(s) == first_chars; });
    if (same_chars) ++report.char_persistent_count;
  }

  std::map<std::string, std::pair<std::size_t, std::size_t>> band;  // in, total
  for (const auto& [key, s] : summaries) {
    auto& [inside, total] = band[key.snapshot];
    ++total;
    if (in_link_directory_band(s.link_count, s.char_count)) ++inside;
  }
  for (const auto& [snap, counts] : band) {
    report.band_fraction_per_snapshot[snap] =
        static_cast<double>(counts.first) / static_cast<double>(counts.second);
  }
  return report;
}

nlohmann::json to_json(const PersistenceReport& report) {
  json j;
  j["snapshots"] = report.snapshots;
  j["service_count"] = report.service_count;
  json patterns = json::array();
  for (const auto& [pattern, count] : report.membership_counts) {
    patterns.push_back({{"snapshots", pattern}, {"count", count}});
  }
  j["membership_counts"] = std::move(patterns);
  j["tree_persistent_count"] = report.tree_persistent_count;
  j["char_persistent_count"] = report.char_persistent_count;
  j["band_fraction_per_snapshot"] = report.band_fraction_per_snapshot;
  return j;
}

std::string summaries_csv(const SummaryTable& table) {
  std::ostringstream out;
  out << "service,snapshot,tree_height,chars,links,lcratio\n";
  for (const auto& [key, s] : table) {
    out << csv_field(s.service) << ',' << csv_field(s.snapshot) << ','
        << s.tree_height << ',' << s.char_count << ',' << s.link_count << ','
        << format_number(s.lcratio()) << '\n';
  }
  return out.str();
}

SummaryTable parse_summaries_csv(std::istream& in) {
  SummaryTable table;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.empty() || text == "\r") continue;
    const auto cells = split_csv(text);
    if (line == 1 && !cells.empty() && cells[0] == "service") continue;
    if (cells.size() < 5) throw ParseError(line, "", "expected 6 columns");
    ServiceSummary s;
    s.service = cells[0];
    s.snapshot = cells[1];
    try {
      s.tree_height = std::stoull(cells[2]);
      s.char_count = std::stoull(cells[3]);
      s.link_count = std::stoull(cells[4]);
    } catch (const std::exception&) {
      throw ParseError(line, "", "bad integer column");
    }
    table[ServiceKey{s.snapshot, s.service}] = s;
  }
  return table;
}

std::map<std::string, double> pooled_lcratio(const SummaryTable& table) {
  std::map<std::string, std::pair<std::uint64_t, std::uint64_t>> totals;
  for (const auto& [key, s] : table) {
    auto& [links, chars] = totals[s.service];
    links += s.link_count;
    chars += s.char_count;
  }
  std::map<std::string, double> out;
  for (const auto& [service, t] : totals) {
    out[service] = t.second == 0 ? 0.0
                                 : static_cast<double>(t.first) /
                                       static_cast<double>(t.second);
  }
  return out;
}

}  // namespace hsgraph
