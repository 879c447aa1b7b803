#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <nlohmann/json_fwd.hpp>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hsgraph/graph.hpp"

namespace hsgraph {

// All path-based metrics ignore edge weights: a weight records how many
// hyperlinks were flattened onto an edge, not a length.

struct DistanceStats {
  std::optional<std::uint32_t> diameter;  // empty when no pair is connected
  std::optional<double> average;          // mean over connected ordered pairs
  double efficiency = 0.0;                // unreachable pairs contribute 0
  std::uint64_t connected_pairs = 0;
};

/// Throws DataError when the graph has fewer than two vertices.
DistanceStats distance_stats(const ServiceGraph& g);

/// Pearson correlation over edges of (out-degree of source, in-degree of
/// target); for undirected graphs over both orientations of every edge.
/// Empty when fewer than two edges or either side has zero variance.
std::optional<double> assortativity(const ServiceGraph& g);

/// Out-degree centralization (directed) or degree centralization
/// (undirected). Throws DataError when N < 3.
double centralization(const ServiceGraph& g);

/// Directed: fraction of ordered out-neighbour pairs linked in at least one
/// direction. Undirected: closed triplets over all triplets. Empty when the
/// graph has no triplet at all.
std::optional<double> global_transitivity(const ServiceGraph& g);

struct GlobalMetrics {
  Directedness kind = Directedness::directed;
  std::size_t vertices = 0;
  std::size_t edges = 0;
  double avg_degree = 0.0;
  std::optional<double> assortativity;
  DistanceStats distances;
  // Directed graphs only.
  std::optional<double> max_in_norm;
  std::optional<double> max_out_norm;
  std::optional<double> out_centralization;
  std::optional<double> transitivity;
  // Undirected graphs only.
  std::optional<double> max_norm;
  std::optional<double> centralization;
  std::optional<double> clustering;
};

GlobalMetrics global_metrics(const ServiceGraph& g);
nlohmann::json to_json(const GlobalMetrics& m);

struct RankOptions {
  bool weighted = true;
  double damping = 0.85;
  double tolerance = 1e-12;
  std::size_t max_iterations = 20000;
};

/// Uniform teleport; mass of dangling vertices is spread uniformly.
/// Weighted mode makes transitions proportional to edge weight.
std::vector<double> pagerank(const ServiceGraph& g, const RankOptions& opt = {});

struct HitsScores {
  std::vector<double> hub;
  std::vector<double> authority;
  std::size_t iterations = 0;
  bool converged = false;
};

/// Kleinberg hub/authority power iteration, each vector unit L2 norm.
HitsScores hits(const ServiceGraph& g, const RankOptions& opt = {});

/// Products of one all-sources BFS sweep. Not-a-value (NaN) marks undefined
/// local efficiency and transitivity (fewer than two out-neighbours).
struct PathMetrics {
  std::vector<double> betweenness;
  std::vector<double> closeness;
  std::vector<double> eccentricity;
  std::vector<double> efficiency;
  std::vector<double> transitivity;
};

PathMetrics path_metrics(const ServiceGraph& g);

/// Local transitivity only; cheaper than a full sweep.
std::vector<double> local_transitivity(const ServiceGraph& g);

/// One row per vertex, columns in the fixed CSV order below.
struct VertexMetrics {
  Directedness kind = Directedness::directed;
  std::vector<std::string> vertices;
  std::vector<double> in_degree;
  std::vector<double> out_degree;
  std::vector<double> degree;
  std::vector<double> betweenness;
  std::vector<double> closeness;
  std::vector<double> pagerank;
  std::vector<double> authscore;
  std::vector<double> hubscore;
  std::vector<double> efficiency;
  std::vector<double> transitivity;
  std::vector<double> eccentricity;
  std::vector<double> lcratio;

  struct Column {
    std::string_view name;
    const std::vector<double>* values;
  };
  /// Every numeric column, CSV order.
  std::vector<Column> all_columns() const;
  /// Columns used for correlation and gain analysis: in/out degree for
  /// directed graphs, degree for undirected ones, then the local metrics.
  std::vector<Column> analysis_columns() const;
};

/// `lcratio` maps service id to its links-to-chars ratio; vertices missing
/// from it get not-a-value.
VertexMetrics vertex_metrics(const ServiceGraph& g,
                             const std::map<std::string, double>& lcratio,
                             const RankOptions& opt = {});

/// Header: vertex,in_degree,out_degree,degree,betweenness,closeness,
/// pagerank,authscore,hubscore,efficiency,transitivity,eccentricity,lcratio
std::string vertex_metrics_csv(const VertexMetrics& vm);
VertexMetrics parse_vertex_metrics_csv(std::istream& in, Directedness kind);

/// Cumulative share of the giant weakly connected component that is a hub
/// or at distance one from one of the top-k hubs. Hubs are ranked by
/// out-degree (degree when undirected), ties by name. At most N entries.
std::vector<double> hub_reach_curve(const ServiceGraph& g, std::size_t k = 25);

}  // namespace hsgraph
