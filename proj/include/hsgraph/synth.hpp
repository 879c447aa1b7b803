#pragma once

#include <cstdint>
#include <filesystem>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "hsgraph/ingest.hpp"

namespace hsgraph {

/// Hub-dominant multi-snapshot crawl generator.
///
/// Services are placed on a fixed topological order so that random links
/// never close a cycle: the only non-trivial strongly connected components
/// are the two planted mutual-link communities. Community A sits on top and
/// feeds the hub, so the hub and everything it reaches fall into OUT.
struct SynthOptions {
  std::uint64_t seed = 2024;
  std::size_t services = 2000;
  std::size_t snapshots = 3;
  double retention = 0.70;  // share present in every snapshot
  double hub_core_coverage = 0.75;
  double hub_volatile_coverage = 0.60;
  std::size_t community_a = 40;
  std::size_t community_b = 30;
  double community_density = 0.5;  // mutual pair probability inside a community
  double linker_fraction = 0.15;   // services with random outgoing links
  double out_alpha = 1.5;          // linker out-degree exponent
  std::uint64_t max_out_degree = 400;
  double in_alpha = 2.7;            // target attractiveness exponent
  double labelled_fraction = 0.6;   // share of services in the label file
  double unknown_label_fraction = 0.05;
};

struct SynthCorpus {
  std::vector<std::string> snapshot_ids;
  std::vector<std::vector<PageRecord>> pages;  // per snapshot
  std::string labels_csv;
  nlohmann::json planted;
};

SynthCorpus generate_corpus(const SynthOptions& opt = {});

/// Writes snapshot JSON-lines files, labels.csv, planted.json and a
/// config.json that runs the full pipeline over them.
void write_corpus(const SynthCorpus& corpus, const std::filesystem::path& dir);

std::string pages_jsonl(const std::vector<PageRecord>& pages);

}  // namespace hsgraph
