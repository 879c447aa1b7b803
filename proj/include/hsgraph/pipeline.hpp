#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <nlohmann/json.hpp>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hsgraph/graph.hpp"
#include "hsgraph/ingest.hpp"

namespace hsgraph {

/// Library version string.
std::string_view version();

enum class ComponentPolicy : std::uint8_t { whole, giant_wcc };

struct RunConfig {
  std::vector<std::filesystem::path> pages;  // JSON-lines files, any snapshot mix
  std::optional<std::filesystem::path> labels;
  std::filesystem::path output;
  bool per_snapshot = true;
  bool intersection = true;
  bool unite = true;
  bool directed = true;
  bool undirected = true;
  bool strict_namespace = false;
  ComponentPolicy component = ComponentPolicy::giant_wcc;
  bool weighted_rank = true;
  std::uint64_t seed_louvain = 0;
  std::uint64_t seed_fit = 0;
  std::size_t k_hubs = 25;
  std::size_t min_tail = 50;
  std::size_t bootstrap = 0;
};

/// Keys accepted by --set and the HSGRAPH_* environment overrides. The
/// variable for a key is HSGRAPH_ + upper-cased key with '.' -> '_', e.g.
/// seeds.louvain -> HSGRAPH_SEEDS_LOUVAIN.
std::span<const std::string_view> config_keys();
std::string env_name(std::string_view key);

/// Parses a config document. Relative paths are resolved against `base`.
/// Unknown keys are a UsageError.
RunConfig config_from_json(const nlohmann::json& doc, const std::filesystem::path& base);
RunConfig load_config(const std::filesystem::path& file);

/// Applies `key=value`. Values are read as JSON when they parse, otherwise
/// as plain strings; "on"/"off" are accepted for booleans. Paths are
/// relative to the working directory.
void apply_override(RunConfig& cfg, std::string_view assignment);

/// Applies every HSGRAPH_* variable that `lookup` returns a value for.
void apply_environment(RunConfig& cfg,
                       const std::function<std::optional<std::string>(const std::string&)>& lookup);

/// Checks that every referenced input exists and the selection is not
/// empty. Throws UsageError.
void validate(const RunConfig& cfg);

nlohmann::json to_json(const RunConfig& cfg);

/// Page records grouped by snapshot id, in id order.
std::map<std::string, std::vector<PageRecord>> load_pages(
    std::span<const std::filesystem::path> files);

struct NamedGraph {
  std::string name;  // e.g. dsg-snp1, usg-union
  ServiceGraph graph;
};

/// The configured selection: per-snapshot graphs, then intersection and
/// union, directed before undirected.
std::vector<NamedGraph> build_graphs(const std::map<std::string, std::vector<PageRecord>>& pages,
                                     const RunConfig& cfg);

/// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view bytes);

struct RunSummary {
  std::filesystem::path output;
  std::vector<std::string> artifacts;  // relative paths
  std::vector<std::string> skipped;    // stage names
};

/// Full run into cfg.output. Outputs are staged in a sibling
/// "<output>.partial" directory that is renamed on success and removed on
/// failure. An existing output directory is replaced only when it holds a
/// manifest.json from an earlier run. Errors keep their type and carry the
/// stage name in the message.
RunSummary run_pipeline(const RunConfig& cfg);

}  // namespace hsgraph
