// hsgraph: command-line front end. Each subcommand works standalone on
// intermediate files; `run` chains them from a config document.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "hsgraph/bowtie.hpp"
#include "hsgraph/community.hpp"
#include "hsgraph/error.hpp"
#include "hsgraph/fitting.hpp"
#include "hsgraph/ingest.hpp"
#include "hsgraph/metrics.hpp"
#include "hsgraph/pipeline.hpp"
#include "hsgraph/stats.hpp"
#include "hsgraph/synth.hpp"
#include "hsgraph/textio.hpp"
#include "hsgraph/transforms.hpp"

namespace fs = std::filesystem;
using namespace hsgraph;

namespace {

enum Exit { ok = 0, usage = 1, data = 2, internal = 3 };

/// "-" or empty means stdout.
void emit(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content;
  } else {
    write_file_atomic(path, content);
  }
}

ServiceGraph load_graph(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open graph " + path.string());
  try {
    return read_graph(in);
  } catch (const DataError& e) {
    throw DataError(path.filename().string() + ": " + e.what());
  }
}

template <typename T, typename F>
T load_with(const fs::path& path, F&& parse) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open " + path.string());
  try {
    return parse(in);
  } catch (const DataError& e) {
    throw DataError(path.filename().string() + ": " + e.what());
  }
}

bool on_off(const std::string& s) {
  if (s == "on") return true;
  if (s == "off") return false;
  throw UsageError("expected on or off, got '" + s + "'");
}

std::string stem_of(const fs::path& p) { return p.stem().string(); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hidden-service crawl graph analysis"};
  app.set_version_flag("--version", std::string(version()));
  app.require_subcommand(1);

  // ingest
  std::vector<std::string> pages;
  std::string out;
  auto* ingest = app.add_subcommand("ingest", "Per-service summaries and persistence report");
  ingest->add_option("--pages", pages, "Page-record JSON-lines files")->required()->check(CLI::ExistingFile);
  ingest->add_option("--out", out, "Output directory")->required();

  // build
  std::string select = "union", kind = "directed";
  bool strict = false;
  auto* build = app.add_subcommand("build", "Build one service graph");
  build->add_option("--pages", pages, "Page-record JSON-lines files")->required()->check(CLI::ExistingFile);
  build->add_option("--select", select, "Snapshot id, 'intersection' or 'union'")->capture_default_str();
  build->add_option("--kind", kind, "directed or undirected")
      ->check(CLI::IsMember({"directed", "undirected"}))
      ->capture_default_str();
  build->add_flag("--strict-namespace", strict, "Accept only v2/v3 onion labels");
  build->add_option("--out", out, "Graph file, '-' for stdout");

  // metrics
  std::string graph_path, summaries_path, component = "giant-wcc", weighted = "on";
  std::size_t k_hubs = 25;
  auto* metrics = app.add_subcommand("metrics", "Global and per-vertex metrics of a graph");
  metrics->add_option("--graph", graph_path, "Graph file")->required()->check(CLI::ExistingFile);
  metrics->add_option("--summaries", summaries_path, "Summaries CSV for the lcratio column")
      ->check(CLI::ExistingFile);
  metrics->add_option("--component", component, "whole or giant-wcc")
      ->check(CLI::IsMember({"whole", "giant-wcc"}))
      ->capture_default_str();
  metrics->add_option("--weighted-rank", weighted, "Weighted PageRank/HITS: on or off")
      ->check(CLI::IsMember({"on", "off"}))
      ->capture_default_str();
  metrics->add_option("--k-hubs", k_hubs, "Hubs in the reach curve")->capture_default_str();
  metrics->add_option("--out", out, "Output directory")->required();

  // fit
  std::string degree = "out";
  std::uint64_t seed_fit = 0;
  std::size_t min_tail = 50, bootstrap = 0;
  std::optional<std::uint64_t> xmin;
  auto* fit = app.add_subcommand("fit", "Power-law and log-normal degree fits");
  fit->add_option("--graph", graph_path, "Graph file")->required()->check(CLI::ExistingFile);
  fit->add_option("--degree", degree, "in, out or total")
      ->check(CLI::IsMember({"in", "out", "total"}))
      ->capture_default_str();
  fit->add_option("--min-tail", min_tail, "Smallest tail considered")->capture_default_str();
  fit->add_option("--xmin", xmin, "Fixed cutoff instead of the KS scan");
  fit->add_option("--bootstrap", bootstrap, "Goodness-of-fit replicates")->capture_default_str();
  fit->add_option("--seed-fit", seed_fit, "Bootstrap sampler seed")->capture_default_str();
  fit->add_option("--out", out, "Report file, '-' for stdout");

  // communities
  std::uint64_t seed_louvain = 0;
  auto* communities = app.add_subcommand("communities", "Louvain partition of a graph");
  communities->add_option("--graph", graph_path, "Graph file")->required()->check(CLI::ExistingFile);
  communities->add_option("--seed-louvain", seed_louvain, "Visit-order seed")->capture_default_str();
  communities->add_option("--out", out, "Partition CSV, '-' for stdout");

  // compare
  std::vector<std::string> partitions;
  auto* compare = app.add_subcommand("compare", "AMI of two partitions on their common vertices");
  compare->add_option("partitions", partitions, "Two partition CSV files")
      ->required()
      ->expected(2)
      ->check(CLI::ExistingFile);

  // bowtie
  std::string classes_path;
  auto* bowtie = app.add_subcommand("bowtie", "Bow-tie decomposition of a directed graph");
  bowtie->add_option("--graph", graph_path, "Graph file")->required()->check(CLI::ExistingFile);
  bowtie->add_option("--classes", classes_path, "Optional per-vertex class CSV");
  bowtie->add_option("--out", out, "Report file, '-' for stdout");

  // stats
  std::string metrics_path, labels_path;
  auto* stats = app.add_subcommand("stats", "Correlation, prevalence and information gain");
  stats->add_option("--metrics", metrics_path, "Vertex metrics CSV")->required()->check(CLI::ExistingFile);
  stats->add_option("--kind", kind, "directed or undirected")
      ->check(CLI::IsMember({"directed", "undirected"}))
      ->capture_default_str();
  stats->add_option("--labels", labels_path, "Label CSV")->check(CLI::ExistingFile);
  stats->add_option("--graph", graph_path, "Graph file for prevalence")->check(CLI::ExistingFile);
  stats->add_option("--out", out, "Output directory")->required();

  // run
  std::string config_path;
  std::vector<std::string> sets;
  std::optional<std::uint64_t> run_seed_louvain, run_seed_fit;
  std::optional<std::size_t> run_k_hubs;
  std::optional<std::string> run_weighted;
  auto* run = app.add_subcommand("run", "Full pipeline from a config document");
  run->add_option("--config", config_path, "Config JSON")->required()->check(CLI::ExistingFile);
  run->add_option("--set", sets, "Override key=value (repeatable)");
  run->add_option("--seed-louvain", run_seed_louvain, "Louvain seed");
  run->add_option("--seed-fit", run_seed_fit, "Fitting sampler seed");
  run->add_option("--k-hubs", run_k_hubs, "Hubs in the reach curve");
  run->add_option("--weighted-rank", run_weighted, "on or off")->check(CLI::IsMember({"on", "off"}));
  run->add_option("--out", out, "Output directory (overrides the config)");

  // synth
  SynthOptions synth_opt;
  auto* synth = app.add_subcommand("synth", "Write the synthetic multi-snapshot corpus");
  synth->add_option("--out", out, "Corpus directory")->required();
  synth->add_option("--seed", synth_opt.seed, "Generator seed")->capture_default_str();
  synth->add_option("--services", synth_opt.services, "Number of services")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? Exit::ok : Exit::usage;
  }

  try {
    if (*ingest) {
      const std::vector<fs::path> files(pages.begin(), pages.end());
      std::vector<PageRecord> all;
      for (auto& [snap, recs] : load_pages(files)) {
        for (auto& r : recs) all.push_back(std::move(r));
      }
      fs::create_directories(out);
      write_file_atomic(fs::path(out) / "summaries.csv", summaries_csv(summarize_services(all)));
      write_file_atomic(fs::path(out) / "persistence.json",
                        to_json(persistence_report(all)).dump(2) + "\n");
    } else if (*build) {
      const std::vector<fs::path> files(pages.begin(), pages.end());
      RunConfig cfg;
      cfg.strict_namespace = strict;
      cfg.directed = kind == "directed";
      cfg.undirected = !cfg.directed;
      cfg.per_snapshot = select != "intersection" && select != "union";
      cfg.intersection = select == "intersection";
      cfg.unite = select == "union";
      const auto by_snapshot = load_pages(files);
      std::string wanted = (cfg.directed ? "dsg-" : "usg-") + select;
      if (select == "union" && by_snapshot.size() == 1) {
        // union of one snapshot is that snapshot
        wanted = (cfg.directed ? "dsg-" : "usg-") + by_snapshot.begin()->first;
        cfg.per_snapshot = true;
      }
      const auto graphs = build_graphs(by_snapshot, cfg);
      const auto it = std::find_if(graphs.begin(), graphs.end(),
                                   [&](const NamedGraph& g) { return g.name == wanted; });
      if (it == graphs.end()) throw UsageError("no graph '" + select + "' in the given pages");
      emit(out, write_graph(it->graph));
    } else if (*metrics) {
      const auto g = load_graph(graph_path);
      const auto analysed = component == "whole" ? g : giant_wcc(g);
      std::map<std::string, double> lcratio;
      if (!summaries_path.empty()) {
        lcratio = pooled_lcratio(load_with<SummaryTable>(summaries_path, parse_summaries_csv));
      }
      RankOptions ro;
      ro.weighted = on_off(weighted);
      const auto stem = stem_of(graph_path);
      fs::create_directories(out);
      write_file_atomic(fs::path(out) / (stem + ".global.json"),
                        to_json(global_metrics(analysed)).dump(2) + "\n");
      write_file_atomic(fs::path(out) / (stem + ".vertices.csv"),
                        vertex_metrics_csv(vertex_metrics(analysed, lcratio, ro)));
      std::string curve = "k,reach\n";
      const auto reach = hub_reach_curve(g, k_hubs);
      for (std::size_t i = 0; i < reach.size(); ++i) {
        curve += std::to_string(i + 1) + ',' + format_number(reach[i]) + '\n';
      }
      write_file_atomic(fs::path(out) / (stem + ".hub_reach.csv"), curve);
    } else if (*fit) {
      const auto g = load_graph(graph_path);
      FitOptions fo;
      fo.min_tail = min_tail;
      fo.xmin = xmin;
      fo.bootstrap = bootstrap;
      fo.seed = seed_fit;
      const auto report = fit_report(positive_degrees(g, parse_degree_kind(degree)), fo);
      emit(out, to_json(report).dump(2) + "\n");
    } else if (*communities) {
      const auto g = load_graph(graph_path);
      LouvainOptions lo;
      lo.seed = seed_louvain;
      const auto p = louvain(g, lo);
      emit(out, partition_csv(p));
      if (!out.empty() && out != "-") {
        nlohmann::json j;
        j["clusters"] = p.cluster_count();
        j["modularity"] = g.edge_count() == 0 ? nlohmann::json(nullptr) : nlohmann::json(modularity(g, p));
        std::cout << j.dump() << '\n';
      }
    } else if (*compare) {
      const auto a = load_with<Partition>(partitions[0], parse_partition_csv);
      const auto b = load_with<Partition>(partitions[1], parse_partition_csv);
      const auto score = ami_on_common(a, b);
      nlohmann::json j;
      j["ami"] = score ? nlohmann::json(*score) : nlohmann::json(nullptr);
      std::cout << j.dump() << '\n';
    } else if (*bowtie) {
      const auto g = load_graph(graph_path);
      const auto b = bowtie_decompose(g);
      emit(out, to_json(b).dump(2) + "\n");
      if (!classes_path.empty()) {
        std::string csv = "vertex,class\n";
        for (VertexId v = 0; v < g.vertex_count(); ++v) {
          csv += csv_field(g.name(v)) + ',' + std::string(to_string(b.classes[v])) + '\n';
        }
        write_file_atomic(classes_path, csv);
      }
    } else if (*stats) {
      const auto dir = kind == "directed" ? Directedness::directed : Directedness::undirected;
      const auto vm = load_with<VertexMetrics>(
          metrics_path, [dir](std::istream& in) { return parse_vertex_metrics_csv(in, dir); });
      const auto stem = stem_of(metrics_path);
      fs::create_directories(out);
      write_file_atomic(fs::path(out) / (stem + ".correlation.csv"), correlation_csv(spearman_matrix(vm)));
      if (!labels_path.empty()) {
        const auto labels = load_with<LabelSet>(labels_path, parse_labels);
        write_file_atomic(fs::path(out) / (stem + ".gain.csv"), gain_csv(gain_report(vm, labels)));
        if (!graph_path.empty()) {
          write_file_atomic(fs::path(out) / (stem + ".prevalence.json"),
                            to_json(tag_prevalence(labels, load_graph(graph_path))).dump(2) + "\n");
        }
      }
    } else if (*run) {
      auto cfg = load_config(config_path);
      apply_environment(cfg, [](const std::string& name) -> std::optional<std::string> {
        if (const char* v = std::getenv(name.c_str())) return std::string(v);
        return std::nullopt;
      });
      for (const auto& s : sets) apply_override(cfg, s);
      if (run_seed_louvain) cfg.seed_louvain = *run_seed_louvain;
      if (run_seed_fit) cfg.seed_fit = *run_seed_fit;
      if (run_k_hubs) cfg.k_hubs = *run_k_hubs;
      if (run_weighted) cfg.weighted_rank = on_off(*run_weighted);
      if (!out.empty()) cfg.output = out;
      const auto summary = run_pipeline(cfg);
      std::cout << summary.output.string() << ": " << summary.artifacts.size() << " artifacts";
      if (!summary.skipped.empty()) std::cout << ", " << summary.skipped.size() << " skipped";
      std::cout << '\n';
    } else if (*synth) {
      write_corpus(generate_corpus(synth_opt), out);
    }
  } catch (const UsageError& e) {
    std::cerr << "hsgraph: " << e.what() << '\n';
    return Exit::usage;
  } catch (const DataError& e) {
    std::cerr << "hsgraph: " << e.what() << '\n';
    return Exit::data;
  } catch (const std::exception& e) {
    std::cerr << "hsgraph: internal error: " << e.what() << '\n';
    return Exit::internal;
  }
  return Exit::ok;
}
