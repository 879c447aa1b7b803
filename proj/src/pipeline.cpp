#include "hsgraph/pipeline.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <exception>
#include <fstream>
#include <set>
#include <sstream>

#include "hsgraph/bowtie.hpp"
#include "hsgraph/community.hpp"
#include "hsgraph/error.hpp"
#include "hsgraph/fitting.hpp"
#include "hsgraph/metrics.hpp"
#include "hsgraph/parallel.hpp"
#include "hsgraph/stats.hpp"
#include "hsgraph/textio.hpp"
#include "hsgraph/transforms.hpp"

#ifndef HSGRAPH_VERSION
#define HSGRAPH_VERSION "dev"
#endif

namespace hsgraph {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::array<std::string_view, 16> kKeys = {
    "pages",           "labels",          "output",         "graphs.snapshots",
    "graphs.intersection", "graphs.union", "graphs.directed", "graphs.undirected",
    "strict_namespace", "component",      "weighted_rank",  "seeds.louvain",
    "seeds.fit",       "k_hubs",          "fit.min_tail",   "fit.bootstrap"};

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

bool as_bool(std::string_view key, const json& v) {
  if (v.is_boolean()) return v.get<bool>();
  if (v.is_string()) {
    const auto s = lower(v.get<std::string>());
    if (s == "on" || s == "true" || s == "yes" || s == "1") return true;
    if (s == "off" || s == "false" || s == "no" || s == "0") return false;
  }
  throw UsageError(std::string(key) + ": expected on/off");
}

std::uint64_t as_count(std::string_view key, const json& v) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(v.get<std::int64_t>());
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    std::uint64_t x = 0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
    if (ec == std::errc() && p == s.data() + s.size() && !s.empty()) return x;
  }
  throw UsageError(std::string(key) + ": expected a non-negative integer");
}

fs::path as_path(std::string_view key, const json& v, const fs::path& base) {
  if (!v.is_string() || v.get<std::string>().empty()) {
    throw UsageError(std::string(key) + ": expected a path");
  }
  fs::path p = v.get<std::string>();
  return p.is_relative() && !base.empty() ? base / p : p;
}

void set_key(RunConfig& cfg, std::string_view key, const json& v, const fs::path& base) {
  if (key == "pages") {
    cfg.pages.clear();
    if (v.is_array()) {
      for (const auto& item : v) cfg.pages.push_back(as_path(key, item, base));
    } else if (v.is_string()) {
      // comma-separated list from --set or the environment
      std::stringstream ss(v.get<std::string>());
      for (std::string item; std::getline(ss, item, ',');) {
        if (!item.empty()) cfg.pages.push_back(as_path(key, item, base));
      }
    } else {
      throw UsageError("pages: expected a list of paths");
    }
  } else if (key == "labels") {
    if (v.is_null() || (v.is_string() && v.get<std::string>().empty())) {
      cfg.labels.reset();
    } else {
      cfg.labels = as_path(key, v, base);
    }
  } else if (key == "output") {
    cfg.output = as_path(key, v, base);
  } else if (key == "graphs.snapshots") {
    cfg.per_snapshot = as_bool(key, v);
  } else if (key == "graphs.intersection") {
    cfg.intersection = as_bool(key, v);
  } else if (key == "graphs.union") {
    cfg.unite = as_bool(key, v);
  } else if (key == "graphs.directed") {
    cfg.directed = as_bool(key, v);
  } else if (key == "graphs.undirected") {
    cfg.undirected = as_bool(key, v);
  } else if (key == "strict_namespace") {
    cfg.strict_namespace = as_bool(key, v);
  } else if (key == "component") {
    const auto s = v.is_string() ? v.get<std::string>() : std::string();
    if (s == "whole") {
      cfg.component = ComponentPolicy::whole;
    } else if (s == "giant-wcc") {
      cfg.component = ComponentPolicy::giant_wcc;
    } else {
      throw UsageError("component: expected whole or giant-wcc");
    }
  } else if (key == "weighted_rank") {
    cfg.weighted_rank = as_bool(key, v);
  } else if (key == "seeds.louvain") {
    cfg.seed_louvain = as_count(key, v);
  } else if (key == "seeds.fit") {
    cfg.seed_fit = as_count(key, v);
  } else if (key == "k_hubs") {
    cfg.k_hubs = as_count(key, v);
  } else if (key == "fit.min_tail") {
    cfg.min_tail = as_count(key, v);
  } else if (key == "fit.bootstrap") {
    cfg.bootstrap = as_count(key, v);
  } else {
    throw UsageError("unknown config key '" + std::string(key) + "'");
  }
}

void flatten(const json& doc, const std::string& prefix, std::vector<std::pair<std::string, json>>& out) {
  for (const auto& [k, v] : doc.items()) {
    const auto key = prefix.empty() ? k : prefix + "." + k;
    if (v.is_object()) {
      flatten(v, key, out);
    } else {
      out.emplace_back(key, v);
    }
  }
}

json value_of(std::string_view text) {
  auto v = json::parse(text, nullptr, false);
  if (v.is_discarded()) return std::string(text);
  return v;
}

/// Rethrows the active exception with the stage name prepended, keeping
/// its category so the CLI exit code stays meaningful.
[[noreturn]] void rethrow_in(const std::string& stage) {
  try {
    throw;
  } catch (const UsageError& e) {
    throw UsageError(stage + ": " + e.what());
  } catch (const DataError& e) {
    throw DataError(stage + ": " + e.what());
  } catch (const std::bad_alloc&) {
    throw;
  } catch (const std::exception& e) {
    throw std::runtime_error(stage + ": " + e.what());
  }
}

template <typename F>
decltype(auto) stage(const std::string& name, F&& f) {
  try {
    return f();
  } catch (...) {
    rethrow_in(name);
  }
}

struct Artifact {
  std::string path;
  std::string content;
};

struct Skip {
  std::string stage;
  std::string reason;
};

struct GraphOutputs {
  std::vector<Artifact> artifacts;
  std::vector<Skip> skipped;
  std::optional<Partition> partition;
};

std::string hub_reach_csv(const std::vector<double>& curve) {
  std::string out = "k,reach\n";
  for (std::size_t i = 0; i < curve.size(); ++i) {
    out += std::to_string(i + 1) + ',' + format_number(curve[i]) + '\n';
  }
  return out;
}

std::string bowtie_csv(const ServiceGraph& g, const BowTie& b) {
  std::string out = "vertex,class\n";
  for (VertexId v = 0; v < g.vertex_count(); ++v) {
    out += csv_field(g.name(v)) + ',' + std::string(to_string(b.classes[v])) + '\n';
  }
  return out;
}

/// Content-class and Normal/Suspicious partitions over the labelled
/// vertices of `p`, with AMI against the matching restriction of `p`.
json label_agreement(const Partition& p, const LabelSet& labels) {
  std::vector<std::string> keep;
  std::vector<std::uint32_t> cls, type;
  for (const auto& v : p.vertices) {
    if (auto it = labels.labels.find(v); it != labels.labels.end()) {
      keep.push_back(v);
      cls.push_back(static_cast<std::uint32_t>(it->second.content_class));
      type.push_back(static_cast<std::uint32_t>(it->second.type()));
    }
  }
  json j;
  j["labelled_vertices"] = keep.size();
  if (keep.size() < 2) {
    j["ami_class"] = nullptr;
    j["ami_type"] = nullptr;
    return j;
  }
  const auto louv = restrict_partition(p, keep);
  j["ami_class"] = ami(louv.labels, dense_labels(cls));
  j["ami_type"] = ami(louv.labels, dense_labels(type));
  return j;
}

struct Context {
  const RunConfig& cfg;
  const SummaryTable& summaries;
  const std::map<std::string, double>& pooled;
  const std::optional<LabelSet>& labels;
};

std::map<std::string, double> snapshot_lcratio(const SummaryTable& table, const std::string& snap) {
  std::map<std::string, double> out;
  for (const auto& [key, s] : table) {
    if (key.snapshot == snap) out.emplace(key.service, s.lcratio());
  }
  return out;
}

GraphOutputs analyse(const NamedGraph& ng, const Context& ctx) {
  GraphOutputs res;
  const auto& name = ng.name;
  const auto& g = ng.graph;
  const auto emit = [&](std::string path, std::string content) {
    res.artifacts.push_back({std::move(path), std::move(content)});
  };

  const auto analysed = stage("metrics " + name, [&] {
    return ctx.cfg.component == ComponentPolicy::giant_wcc ? giant_wcc(g) : g;
  });

  const auto dash = name.find('-');
  const auto scope = name.substr(dash + 1);
  const bool combined = scope == "intersection" || scope == "union";
  const auto lcratio = combined ? ctx.pooled : snapshot_lcratio(ctx.summaries, scope);

  const auto vm = stage("metrics " + name, [&] {
    emit("metrics/" + name + ".global.json", to_json(global_metrics(analysed)).dump(2) + "\n");
    RankOptions ro;
    ro.weighted = ctx.cfg.weighted_rank;
    auto m = vertex_metrics(analysed, lcratio, ro);
    emit("metrics/" + name + ".vertices.csv", vertex_metrics_csv(m));
    emit("metrics/" + name + ".hub_reach.csv", hub_reach_csv(hub_reach_curve(g, ctx.cfg.k_hubs)));
    return m;
  });

  stage("fit " + name, [&] {
    FitOptions fo;
    fo.min_tail = ctx.cfg.min_tail;
    fo.bootstrap = ctx.cfg.bootstrap;
    fo.seed = ctx.cfg.seed_fit;
    const std::vector<std::pair<std::string, DegreeKind>> kinds =
        g.directed() ? std::vector<std::pair<std::string, DegreeKind>>{{"in", DegreeKind::in},
                                                                        {"out", DegreeKind::out},
                                                                        {"total", DegreeKind::total}}
                     : std::vector<std::pair<std::string, DegreeKind>>{{"degree", DegreeKind::total}};
    for (const auto& [label, kind] : kinds) {
      const auto report = fit_report(positive_degrees(g, kind), fo);
      emit("fits/" + name + "." + label + ".json", to_json(report).dump(2) + "\n");
    }
  });

  res.partition = stage("communities " + name, [&] {
    LouvainOptions lo;
    lo.seed = ctx.cfg.seed_louvain;
    auto p = louvain(g, lo);
    json j;
    j["vertices"] = p.vertices.size();
    j["clusters"] = p.cluster_count();
    j["modularity"] = g.edge_count() == 0 ? json(nullptr) : json(modularity(g, p));
    j["sizes"] = cluster_size_distribution(p);
    emit("communities/" + name + ".csv", partition_csv(p));
    emit("communities/" + name + ".json", j.dump(2) + "\n");
    return p;
  });

  if (g.directed()) {
    stage("bowtie " + name, [&] {
      const auto b = bowtie_decompose(g);
      emit("bowtie/" + name + ".json", to_json(b).dump(2) + "\n");
      emit("bowtie/" + name + ".csv", bowtie_csv(g, b));
    });
  }

  stage("stats " + name, [&] {
    emit("stats/" + name + ".correlation.csv", correlation_csv(spearman_matrix(vm)));
    if (!ctx.labels) return;
    Prevalence prev;
    try {
      prev = tag_prevalence(*ctx.labels, g);
    } catch (const DataError& e) {
      res.skipped.push_back({"labels " + name, e.what()});
      return;
    }
    auto j = to_json(prev);
    j["louvain_agreement"] = label_agreement(*res.partition, *ctx.labels);
    emit("stats/" + name + ".prevalence.json", j.dump(2) + "\n");
    emit("stats/" + name + ".gain.csv", gain_csv(gain_report(vm, *ctx.labels)));
  });
  return res;
}

std::string ami_matrix_csv(const std::vector<NamedGraph>& graphs,
                           const std::vector<GraphOutputs>& outs) {
  std::string csv = "graph";
  for (const auto& g : graphs) csv += ',' + g.name;
  csv += '\n';
  for (std::size_t i = 0; i < graphs.size(); ++i) {
    csv += graphs[i].name;
    for (std::size_t j = 0; j < graphs.size(); ++j) {
      const auto a = ami_on_common(*outs[i].partition, *outs[j].partition);
      csv += ',' + (a ? format_number(*a) : std::string("NA"));
    }
    csv += '\n';
  }
  return csv;
}

}  // namespace

std::string_view version() { return HSGRAPH_VERSION; }

std::span<const std::string_view> config_keys() { return kKeys; }

std::string env_name(std::string_view key) {
  std::string out = "HSGRAPH_";
  for (char c : key) {
    out += c == '.' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  }
  return out;
}

RunConfig config_from_json(const json& doc, const fs::path& base) {
  if (!doc.is_object()) throw UsageError("config must be a JSON object");
  std::vector<std::pair<std::string, json>> flat;
  flatten(doc, "", flat);
  RunConfig cfg;
  for (const auto& [k, v] : flat) set_key(cfg, k, v, base);
  return cfg;
}

RunConfig load_config(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw UsageError("cannot open config " + file.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw UsageError("config " + file.string() + ": " + e.what());
  }
  return config_from_json(doc, file.parent_path());
}

void apply_override(RunConfig& cfg, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0) {
    throw UsageError("expected key=value, got '" + std::string(assignment) + "'");
  }
  const auto key = assignment.substr(0, eq);
  const auto text = assignment.substr(eq + 1);
  // paths and names stay literal even when they happen to parse as JSON
  const bool literal = key == "pages" || key == "labels" || key == "output" || key == "component";
  set_key(cfg, key, literal ? json(std::string(text)) : value_of(text), {});
}

void apply_environment(RunConfig& cfg,
                       const std::function<std::optional<std::string>(const std::string&)>& lookup) {
  for (auto key : kKeys) {
    if (auto v = lookup(env_name(key))) apply_override(cfg, std::string(key) + "=" + *v);
  }
}

void validate(const RunConfig& cfg) {
  if (cfg.pages.empty()) throw UsageError("config lists no page files");
  for (const auto& p : cfg.pages) {
    if (!fs::is_regular_file(p)) throw UsageError("page file not found: " + p.string());
  }
  if (cfg.labels && !fs::is_regular_file(*cfg.labels)) {
    throw UsageError("label file not found: " + cfg.labels->string());
  }
  if (cfg.output.empty()) throw UsageError("no output directory");
  if (!cfg.directed && !cfg.undirected) throw UsageError("no graph kind selected");
  if (!cfg.per_snapshot && !cfg.intersection && !cfg.unite) throw UsageError("no graph selected");
  if (cfg.k_hubs == 0) throw UsageError("k_hubs must be positive");
  if (cfg.min_tail < 2) throw UsageError("fit.min_tail must be at least 2");
}

json to_json(const RunConfig& cfg) {
  json j;
  j["pages"] = json::array();
  for (const auto& p : cfg.pages) j["pages"].push_back(p.string());
  j["labels"] = cfg.labels ? json(cfg.labels->string()) : json(nullptr);
  j["output"] = cfg.output.string();
  j["graphs"] = {{"snapshots", cfg.per_snapshot}, {"intersection", cfg.intersection},
                 {"union", cfg.unite},            {"directed", cfg.directed},
                 {"undirected", cfg.undirected}};
  j["strict_namespace"] = cfg.strict_namespace;
  j["component"] = cfg.component == ComponentPolicy::whole ? "whole" : "giant-wcc";
  j["weighted_rank"] = cfg.weighted_rank;
  j["seeds"] = {{"louvain", cfg.seed_louvain}, {"fit", cfg.seed_fit}};
  j["k_hubs"] = cfg.k_hubs;
  j["fit"] = {{"min_tail", cfg.min_tail}, {"bootstrap", cfg.bootstrap}};
  return j;
}

std::map<std::string, std::vector<PageRecord>> load_pages(std::span<const fs::path> files) {
  std::map<std::string, std::vector<PageRecord>> by_snapshot;
  for (const auto& f : files) {
    std::ifstream in(f);
    if (!in) throw UsageError("cannot open " + f.string());
    std::vector<PageRecord> pages;
    try {
      pages = parse_pages(in);
    } catch (const DataError& e) {
      throw DataError(f.filename().string() + ": " + e.what());
    }
    for (auto& p : pages) by_snapshot[p.snapshot].push_back(std::move(p));
  }
  return by_snapshot;
}

std::vector<NamedGraph> build_graphs(const std::map<std::string, std::vector<PageRecord>>& pages,
                                     const RunConfig& cfg) {
  OnionNamespace ns;
  ns.strict = cfg.strict_namespace;
  std::vector<ServiceGraph> dsgs, usgs;
  std::vector<std::string> ids;
  for (const auto& [snap, recs] : pages) {
    ids.push_back(snap);
    dsgs.push_back(build_dsg(recs, ns));
    usgs.push_back(to_usg(dsgs.back()));
  }
  std::vector<NamedGraph> out;
  const auto add_kind = [&](const std::string& prefix, const std::vector<ServiceGraph>& gs) {
    if (cfg.per_snapshot) {
      for (std::size_t i = 0; i < gs.size(); ++i) out.push_back({prefix + "-" + ids[i], gs[i]});
    }
    if (gs.size() < 2) return;
    if (cfg.intersection) out.push_back({prefix + "-intersection", intersect(gs)});
    if (cfg.unite) out.push_back({prefix + "-union", unite(gs)});
  };
  if (cfg.directed) add_kind("dsg", dsgs);
  if (cfg.undirected) add_kind("usg", usgs);
  return out;
}

std::string sha256_hex(std::string_view bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md.data(), &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 failed");
  }
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

RunSummary run_pipeline(const RunConfig& cfg) {
  validate(cfg);
  const fs::path out = cfg.output;
  fs::path staging = out;
  staging += ".partial";
  if (fs::exists(out) && !fs::exists(out / "manifest.json")) {
    throw UsageError("output " + out.string() + " exists and is not an earlier run");
  }

  std::vector<Artifact> artifacts;
  std::vector<Skip> skipped;

  fs::remove_all(staging);
  fs::create_directories(staging);
  try {
    const auto pages = stage("ingest", [&] { return load_pages(cfg.pages); });
    std::vector<PageRecord> all;
    for (const auto& [snap, recs] : pages) all.insert(all.end(), recs.begin(), recs.end());
    if (all.empty()) throw DataError("ingest: no page records");

    const auto summaries = stage("ingest", [&] {
      auto table = summarize_services(all);
      artifacts.push_back({"ingest/summaries.csv", summaries_csv(table)});
      if (pages.size() >= 2) {
        artifacts.push_back({"ingest/persistence.json", to_json(persistence_report(all)).dump(2) + "\n"});
      } else {
        skipped.push_back({"persistence", "single snapshot"});
      }
      return table;
    });
    const auto pooled = pooled_lcratio(summaries);

    std::optional<LabelSet> labels;
    if (cfg.labels) {
      labels = stage("labels", [&] {
        std::ifstream in(*cfg.labels);
        if (!in) throw UsageError("cannot open " + cfg.labels->string());
        return parse_labels(in);
      });
    } else {
      skipped.push_back({"labels", "no label file configured"});
    }

    const auto graphs = stage("graphs", [&] {
      auto gs = build_graphs(pages, cfg);
      if (pages.size() < 2 && (cfg.intersection || cfg.unite)) {
        skipped.push_back({"graphs", "intersection and union need two snapshots"});
      }
      for (const auto& ng : gs) {
        if (ng.graph.empty()) throw DataError(ng.name + " is an empty graph");
        artifacts.push_back({"graphs/" + ng.name + ".tsv", write_graph(ng.graph)});
      }
      return gs;
    });
    if (graphs.empty()) throw UsageError("graphs: nothing selected");

    // Independent graphs run concurrently; the first failure in graph order wins.
    const Context ctx{cfg, summaries, pooled, labels};
    std::vector<GraphOutputs> outs(graphs.size());
    std::vector<std::exception_ptr> errors(graphs.size());
    parallel_chunks(graphs.size(), graphs.size(), [&](std::size_t i, std::size_t, std::size_t) {
      try {
        outs[i] = analyse(graphs[i], ctx);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    });
    for (const auto& e : errors)
      if (e) std::rethrow_exception(e);
    for (auto& o : outs) {
      for (auto& a : o.artifacts) artifacts.push_back(std::move(a));
      for (auto& s : o.skipped) skipped.push_back(std::move(s));
    }
    artifacts.push_back({"communities/ami.csv", stage("communities", [&] {
                           return ami_matrix_csv(graphs, outs);
                         })});
    if (!labels) {
      skipped.push_back({"prevalence", "no label file configured"});
      skipped.push_back({"gain", "no label file configured"});
    }

    std::sort(artifacts.begin(), artifacts.end(),
              [](const Artifact& a, const Artifact& b) { return a.path < b.path; });
    json manifest;
    manifest["tool"] = "hsgraph";
    manifest["version"] = version();
    auto settings = to_json(cfg);
    settings.erase("pages");
    settings.erase("labels");
    settings.erase("output");
    manifest["settings"] = settings;
    manifest["inputs"] = json::array();
    const auto input = [&](const fs::path& p, std::string_view role) {
      manifest["inputs"].push_back(
          {{"role", role}, {"file", p.filename().string()}, {"sha256", sha256_hex(read_file(p))}});
    };
    for (const auto& p : cfg.pages) input(p, "pages");
    if (cfg.labels) input(*cfg.labels, "labels");
    manifest["artifacts"] = json::array();
    for (const auto& a : artifacts) {
      const auto path = staging / a.path;
      fs::create_directories(path.parent_path());
      write_file_atomic(path, a.content);
      manifest["artifacts"].push_back(
          {{"path", a.path}, {"bytes", a.content.size()}, {"sha256", sha256_hex(a.content)}});
    }
    manifest["skipped"] = json::array();
    for (const auto& s : skipped) manifest["skipped"].push_back({{"stage", s.stage}, {"reason", s.reason}});
    write_file_atomic(staging / "manifest.json", manifest.dump(2) + "\n");

    fs::remove_all(out);
    fs::rename(staging, out);
  } catch (...) {
    std::error_code ec;
    fs::remove_all(staging, ec);
    throw;
  }

  RunSummary summary;
  summary.output = out;
  for (const auto& a : artifacts) summary.artifacts.push_back(a.path);
  for (const auto& s : skipped) summary.skipped.push_back(s.stage);
  return summary;
}

}  // namespace hsgraph
