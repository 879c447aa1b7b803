#pragma once

#include <compare>
#include <cstdint>
#include <istream>
#include <map>
#include <nlohmann/json_fwd.hpp>
#include <span>
#include <string>
#include <vector>

namespace hsgraph {

/// One crawled page. `links` holds one entry per hyperlink occurrence.
struct PageRecord {
  std::string snapshot;
  std::string service;
  std::string path;
  std::uint64_t depth = 0;
  std::uint64_t chars = 0;
  std::vector<std::string> links;
};

/// Reads JSON-lines page records. Blank lines are skipped; unknown fields
/// are ignored. Throws ParseError carrying the 1-based line number.
std::vector<PageRecord> parse_pages(std::istream& in);

struct ServiceKey {
  std::string snapshot;
  std::string service;
  auto operator<=>(const ServiceKey&) const = default;
};

struct ServiceSummary {
  std::string service;
  std::string snapshot;
  std::uint64_t tree_height = 0;
  std::uint64_t char_count = 0;
  std::uint64_t link_count = 0;

  /// Links per char; 0 when the service has no text.
  double lcratio() const {
    return char_count == 0 ? 0.0
                           : static_cast<double>(link_count) /
                                 static_cast<double>(char_count);
  }
};

using SummaryTable = std::map<ServiceKey, ServiceSummary>;

SummaryTable summarize_services(std::span<const PageRecord> pages);

/// Exact test of lcratio in [1/200, 1/20]. Zero-char services are outside.
bool in_link_directory_band(std::uint64_t links, std::uint64_t chars);

struct PersistenceReport {
  std::vector<std::string> snapshots;  // sorted
  std::size_t service_count = 0;
  /// Sorted snapshot-id pattern -> number of services seen in exactly
  /// those snapshots.
  std::map<std::vector<std::string>, std::size_t> membership_counts;
  std::size_t tree_persistent_count = 0;
  std::size_t char_persistent_count = 0;
  std::map<std::string, double> band_fraction_per_snapshot;
};

/// Requires at least two distinct snapshots ("insufficient snapshots").
PersistenceReport persistence_report(std::span<const PageRecord> pages);

nlohmann::json to_json(const PersistenceReport& report);

/// CSV with header service,snapshot,tree_height,chars,links,lcratio.
std::string summaries_csv(const SummaryTable& table);
SummaryTable parse_summaries_csv(std::istream& in);

/// Per-service lcratio pooled over every snapshot the service appears in:
/// total links / total chars.
std::map<std::string, double> pooled_lcratio(const SummaryTable& table);

}  // namespace hsgraph
